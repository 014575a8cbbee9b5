"""Marked binary trees and the F_3 linear algebra of (1 - rho)-torsion classes.

A tree is stored combinatorially: every inner vertex carries its colour, its
neighbours in anticlockwise planar order and its marked neighbour; leaves are
bound to branch-point indices.  Characteristics are length-m vectors over F_3
(representatives 0, 1, 2) taken modulo the diagonal F_3 (1, ..., 1).
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

WHITE = "white"
BLACK = "black"


class TreeError(ValueError):
    """Invalid tree, configuration or class; ``element`` names the culprit."""

    def __init__(self, message: str, element=None):
        super().__init__(message if element is None else f"{message}: {element!r}")
        self.element = element


# --------------------------------------------------------------------------
# configurations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class BranchConfig:
    """Branch points lambda_i with indices a_i; the curve is y^3 = prod (x - lambda_i)^a_i."""

    points: tuple[complex, ...]
    indices: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(complex(p) for p in self.points))
        object.__setattr__(self, "indices", tuple(int(a) for a in self.indices))

    @property
    def m(self) -> int:
        return len(self.points)

    @property
    def co_indices(self) -> tuple[int, ...]:
        return tuple(3 - a for a in self.indices)

    @property
    def signs(self) -> tuple[int, ...]:
        return tuple(1 if a == 1 else -1 for a in self.indices)

    @property
    def genus(self) -> int:
        return self.m - 2

    def problems(self) -> list[str]:
        out = []
        if len(self.points) != len(self.indices):
            out.append("points and indices differ in length")
        if self.m < 3:
            out.append(f"need at least 3 branch points, got {self.m}")
        for i, a in enumerate(self.indices):
            if a not in (1, 2):
                out.append(f"index a_{i} = {a} not in {{1, 2}}")
        if sum(self.indices) % 3:
            out.append(f"sum of indices {sum(self.indices)} is not divisible by 3")
        for i, p in enumerate(self.points):
            if not np.isfinite(p.real) or not np.isfinite(p.imag):
                out.append(f"branch point {i} is not finite")
        for i, j in itertools.combinations(range(self.m), 2):
            if self.points[i] == self.points[j]:
                out.append(f"branch points {i} and {j} coincide")
        return out

    def validate(self) -> "BranchConfig":
        problems = self.problems()
        if problems:
            raise TreeError("invalid branch configuration", problems[0])
        return self

    def min_distance(self) -> float:
        return min(abs(p - q) for p, q in itertools.combinations(self.points, 2))


# --------------------------------------------------------------------------
# trees
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class InnerVertex:
    id: str
    color: str
    adj: tuple[str, str, str]
    mark: str


@dataclass(frozen=True)
class Leaf:
    id: str
    branch: int


@dataclass(frozen=True)
class MarkedBinaryTree:
    """Planar trivalent bicoloured tree; ``adj`` lists neighbours anticlockwise."""

    inner: tuple[InnerVertex, ...]
    leaves: tuple[Leaf, ...]
    _nbrs: dict = field(init=False, repr=False, compare=False, hash=False)
    _inner_ids: frozenset = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        nbrs: dict[str, tuple[str, ...]] = {}
        for v in self.inner:
            nbrs[v.id] = tuple(v.adj)
        for leaf in self.leaves:
            nbrs.setdefault(leaf.id, ())
        object.__setattr__(self, "_nbrs", nbrs)
        object.__setattr__(self, "_inner_ids", frozenset(v.id for v in self.inner))

    # -- lookup -----------------------------------------------------------
    def vertex(self, vid: str) -> InnerVertex:
        for v in self.inner:
            if v.id == vid:
                return v
        raise TreeError("not an inner vertex", vid)

    def is_inner(self, vid: str) -> bool:
        return vid in self._inner_ids

    def leaf_of_branch(self, i: int) -> Leaf:
        for leaf in self.leaves:
            if leaf.branch == i:
                return leaf
        raise TreeError("no leaf for branch point", i)

    def branch_of(self, vid: str) -> int:
        for leaf in self.leaves:
            if leaf.id == vid:
                return leaf.branch
        raise TreeError("not a leaf", vid)

    def neighbours(self, vid: str) -> tuple[str, ...]:
        if vid in self._nbrs and self._nbrs[vid]:
            return self._nbrs[vid]
        # leaves: the unique inner vertex listing them
        return tuple(v.id for v in self.inner if vid in v.adj)

    def color(self, vid: str, config: BranchConfig | None = None) -> str:
        if self.is_inner(vid):
            return self.vertex(vid).color
        if config is None:
            # a leaf takes the colour opposite to its neighbour
            (u,) = self.neighbours(vid)
            return WHITE if self.vertex(u).color == BLACK else BLACK
        return WHITE if config.indices[self.branch_of(vid)] == 1 else BLACK

    @property
    def m(self) -> int:
        return len(self.leaves)

    @property
    def genus(self) -> int:
        return len(self.inner)

    def edges(self) -> list[tuple[str, str]]:
        out = set()
        for v in self.inner:
            for u in v.adj:
                out.add(tuple(sorted((v.id, u))))
        return sorted(out)

    def inner_edges(self) -> list[tuple[str, str]]:
        return [e for e in self.edges() if self.is_inner(e[0]) and self.is_inner(e[1])]

    # -- planar walks -----------------------------------------------------
    def _next_around(self, x: str, came_from: str) -> str:
        adj = self.neighbours(x)
        if len(adj) == 1:
            return adj[0]
        k = adj.index(came_from)
        return adj[(k + 1) % len(adj)]

    def _walk_leaves(self, start_from: str, start_at: str) -> list[int]:
        """Leaves met walking around the subtree entered along start_from -> start_at."""
        out = []
        prev, cur = start_from, start_at
        while True:
            if not self.is_inner(cur):
                out.append(self.branch_of(cur))
                prev, cur = cur, prev
                if (prev, cur) == (start_at, start_from):
                    break
                continue
            nxt = self._next_around(cur, prev)
            prev, cur = cur, nxt
            if (prev, cur) == (start_at, start_from):
                break
        return out

    def leaf_cycle(self) -> list[int]:
        """Branch indices of the leaves in anticlockwise planar order, from the smallest."""
        first = self.leaf_of_branch(min(leaf.branch for leaf in self.leaves))
        (u,) = self.neighbours(first.id)
        order = [first.branch]
        prev, cur = first.id, u
        while True:
            if not self.is_inner(cur):
                if cur == first.id:
                    break
                order.append(self.branch_of(cur))
                prev, cur = cur, prev
                continue
            prev, cur = cur, self._next_around(cur, prev)
        return order

    def subtree_leaves(self, v: str, towards: str) -> list[int]:
        """Leaves of the component of (tree - v) containing ``towards``, in planar order."""
        if not self.is_inner(towards):
            return [self.branch_of(towards)]
        out = []
        prev, cur = v, towards
        while True:
            if not self.is_inner(cur):
                out.append(self.branch_of(cur))
                prev, cur = cur, prev
                continue
            prev, cur = cur, self._next_around(cur, prev)
            if cur == v:
                break
        return out

    def component(self, v: str, towards: str) -> set[str]:
        """Vertex ids of the component of (tree - v) containing ``towards``."""
        seen = {v, towards}
        stack = [towards]
        while stack:
            x = stack.pop()
            for y in self.neighbours(x):
                if y not in seen:
                    seen.add(y)
                    stack.append(y)
        seen.discard(v)
        return seen

    def inner_order(self) -> list[str]:
        """Inner vertices in planar depth-first order from the lowest-index terminal."""
        first = self.leaf_of_branch(min(leaf.branch for leaf in self.leaves))
        order: list[str] = []
        prev, cur = first.id, self.neighbours(first.id)[0]
        while True:
            if self.is_inner(cur):
                if cur not in order:
                    order.append(cur)
                prev, cur = cur, self._next_around(cur, prev)
            else:
                if cur == first.id:
                    break
                prev, cur = cur, prev
        return order


def make_tree(inner: Iterable[dict], leaves: Iterable[dict]) -> MarkedBinaryTree:
    """Build a tree from JSON-like dicts (ids are normalised to strings)."""
    iv = tuple(
        InnerVertex(str(d["id"]), str(d["color"]), tuple(str(x) for x in d["adj"]), str(d["mark"]))
        for d in inner
    )
    lv = tuple(Leaf(str(d["id"]), int(d["branch"])) for d in leaves)
    return MarkedBinaryTree(iv, lv)


def tree_to_dict(tree: MarkedBinaryTree) -> dict:
    return {
        "inner": [
            {"id": v.id, "color": v.color, "adj": list(v.adj), "mark": v.mark} for v in tree.inner
        ],
        "leaves": [{"id": l.id, "branch": l.branch} for l in tree.leaves],
    }


# --------------------------------------------------------------------------
# validation
# --------------------------------------------------------------------------


@dataclass
class ValidationReport:
    ok: bool
    genus: int | None
    checks: dict[str, bool]
    errors: list[dict]

    def as_dict(self) -> dict:
        return {"ok": self.ok, "genus": self.genus, "checks": self.checks, "errors": self.errors}


def validate_tree(tree: MarkedBinaryTree, config: BranchConfig) -> ValidationReport:
    errors: list[dict] = []
    checks: dict[str, bool] = {}

    def fail(check: str, message: str, element=None):
        checks[check] = False
        errors.append({"check": check, "message": message, "element": element})

    for name in ("config", "ids", "trivalent", "bicoloured", "leaf_colours", "marking",
                 "connected_acyclic", "vertex_count", "leaf_binding"):
        checks[name] = True

    for p in config.problems():
        fail("config", p)

    ids = [v.id for v in tree.inner] + [l.id for l in tree.leaves]
    dup = [x for x in set(ids) if ids.count(x) > 1]
    if dup:
        fail("ids", "duplicate vertex id", sorted(dup)[0])
    known = set(ids)

    for v in tree.inner:
        if v.color not in (WHITE, BLACK):
            fail("bicoloured", "unknown colour", v.id)
        if len(v.adj) != 3 or len(set(v.adj)) != 3:
            fail("trivalent", "inner vertex without exactly 3 distinct neighbours", v.id)
        for u in v.adj:
            if u not in known:
                fail("connected_acyclic", "unknown neighbour id", f"{v.id}->{u}")
        if v.mark not in v.adj:
            fail("marking", "marked neighbour is not adjacent", v.id)

    # symmetric adjacency, leaf degree one
    for v in tree.inner:
        for u in v.adj:
            if u in known and any(w.id == u for w in tree.inner):
                if v.id not in tree.vertex(u).adj:
                    fail("connected_acyclic", "adjacency is not symmetric", f"{v.id}-{u}")
    for leaf in tree.leaves:
        deg = sum(leaf.id in v.adj for v in tree.inner)
        if deg != 1:
            fail("trivalent", "terminal must have exactly one neighbour", leaf.id)

    branches = sorted(l.branch for l in tree.leaves)
    if branches != list(range(config.m)):
        fail("leaf_binding", "leaves must be bound one-to-one to branch points 0..m-1", branches)

    if checks["trivalent"] and checks["connected_acyclic"] and not dup:
        n_vertices = len(ids)
        n_edges = len(tree.edges())
        reach = set()
        if ids:
            stack = [ids[0]]
            while stack:
                x = stack.pop()
                if x in reach:
                    continue
                reach.add(x)
                stack.extend(tree.neighbours(x))
        if len(reach) != n_vertices or n_edges != n_vertices - 1:
            fail("connected_acyclic", "graph is not a tree")

    if checks["trivalent"] and checks["bicoloured"] and checks["leaf_binding"] and not checks.get("config") is False:
        for a, b in tree.edges():
            ca = tree.color(a, config) if a in known else None
            cb = tree.color(b, config) if b in known else None
            if ca == cb:
                fail("bicoloured", "monochromatic edge", f"{a}-{b}")
        for leaf in tree.leaves:
            (u,) = tree.neighbours(leaf.id) or (None,)
            if u is not None and tree.vertex(u).color == tree.color(leaf.id, config):
                fail("leaf_colours", "leaf colour does not match its index", leaf.id)
    if len(tree.inner) != config.m - 2:
        fail("vertex_count", f"{len(tree.inner)} inner vertices, expected m - 2 = {config.m - 2}")

    ok = not errors
    return ValidationReport(ok, len(tree.inner) if ok else None, checks, errors)


def check_tree(tree: MarkedBinaryTree, config: BranchConfig) -> None:
    report = validate_tree(tree, config)
    if not report.ok:
        err = report.errors[0]
        raise TreeError(err["message"], err["element"])


def genus(tree: MarkedBinaryTree) -> int:
    return len(tree.inner)


# --------------------------------------------------------------------------
# blocks and classes
# --------------------------------------------------------------------------


def blocks_at(tree: MarkedBinaryTree, v: str, rotation: int = 1) -> tuple[list[int], list[int], list[int]]:
    """Terminal sets (B1, B2, B3) at inner vertex v.

    B3 lies across the marked edge; B1 and B2 follow it in the planar rotation
    (``rotation=1``: anticlockwise, ``-1``: clockwise).
    """
    if not tree.is_inner(v):
        raise TreeError("not an inner vertex", v)
    return tuple(list(b) for b in _blocks(tree, v, rotation))


@functools.lru_cache(maxsize=4096)
def _blocks(tree: MarkedBinaryTree, v: str, rotation: int) -> tuple[tuple[int, ...], ...]:
    vert = tree.vertex(v)
    k = vert.adj.index(vert.mark)
    n1 = vert.adj[(k + rotation) % 3]
    n2 = vert.adj[(k + 2 * rotation) % 3]
    return tuple(tuple(tree.subtree_leaves(v, n)) for n in (n1, n2, vert.mark))


def normalize(vec: Sequence[int]) -> tuple[int, ...]:
    """Canonical representative mod Diag: first coordinate forced to 0."""
    v0 = int(vec[0]) if len(vec) else 0
    return tuple((int(x) - v0) % 3 for x in vec)


def same_class(u: Sequence[int], v: Sequence[int]) -> bool:
    return normalize(u) == normalize(v)


def project(config_or_indices, vec: Sequence[int]) -> int:
    """Pi(Lambda) = sum eps_i k_i in F_3 (eps_i = a_i mod 3)."""
    indices = config_or_indices.indices if isinstance(config_or_indices, BranchConfig) else config_or_indices
    return int(sum(a * k for a, k in zip(indices, vec)) % 3)


@dataclass(frozen=True)
class F3Class:
    """A labelling of the terminals by F_3; ``in_h`` marks a class of Ker(Pi)/Diag."""

    coeffs: tuple[int, ...]
    in_h: bool = True

    def __post_init__(self):
        c = tuple(int(x) % 3 for x in self.coeffs)
        object.__setattr__(self, "coeffs", normalize(c) if self.in_h else c)

    def __add__(self, other: "F3Class") -> "F3Class":
        return F3Class(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)), self.in_h and other.in_h)

    def __neg__(self) -> "F3Class":
        return F3Class(tuple(-a for a in self.coeffs), self.in_h)

    def __sub__(self, other: "F3Class") -> "F3Class":
        return self + (-other)

    def scale(self, c: int) -> "F3Class":
        return F3Class(tuple(c * a for a in self.coeffs), self.in_h)

    def __eq__(self, other):
        if not isinstance(other, F3Class):
            return NotImplemented
        return normalize(self.coeffs) == normalize(other.coeffs)

    def __hash__(self):
        return hash(normalize(self.coeffs))


def in_kernel(indices: Sequence[int], vec: Sequence[int]) -> bool:
    return project(indices, vec) == 0


def as_class(indices: Sequence[int], vec: Sequence[int]) -> F3Class:
    if not in_kernel(indices, vec):
        raise TreeError("vector is not in Ker(Pi)", tuple(int(x) % 3 for x in vec))
    return F3Class(tuple(vec))


def class_abar(tree: MarkedBinaryTree, v: str, rotation: int = 1) -> F3Class:
    """Class of (1 - rho)/3 A_v: -1 on the terminals of B1, +1 on those of B2."""
    b1, b2, _ = blocks_at(tree, v, rotation)
    vec = [0] * tree.m
    for i in b1:
        vec[i] = -1
    for i in b2:
        vec[i] = 1
    return F3Class(tuple(vec))


def abar_matrix(tree: MarkedBinaryTree, rotation: int = 1) -> np.ndarray:
    """m x g integer matrix whose columns are the class_abar vectors (DFS vertex order)."""
    cols = [class_abar(tree, v, rotation).coeffs for v in tree.inner_order()]
    return np.array(cols, dtype=np.int64).T % 3


# -- F_3 linear algebra -----------------------------------------------------


def f3_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray | None:
    """One solution x of a x = b over F_3, or None."""
    a = np.asarray(a, dtype=np.int64) % 3
    b = np.asarray(b, dtype=np.int64) % 3
    rows, cols = a.shape
    aug = np.concatenate([a, b.reshape(-1, 1)], axis=1)
    pivots = []
    r = 0
    for c in range(cols):
        hit = next((i for i in range(r, rows) if aug[i, c]), None)
        if hit is None:
            continue
        aug[[r, hit]] = aug[[hit, r]]
        aug[r] = (aug[r] * aug[r, c]) % 3  # inverse of 1 is 1, of 2 is 2
        for i in range(rows):
            if i != r and aug[i, c]:
                aug[i] = (aug[i] - aug[i, c] * aug[r]) % 3
        pivots.append(c)
        r += 1
        if r == rows:
            break
    if any(aug[i, -1] for i in range(r, rows)):
        return None
    x = np.zeros(cols, dtype=np.int64)
    for i, c in enumerate(pivots):
        x[c] = aug[i, -1]
    return x


def f3_rank(a: np.ndarray) -> int:
    a = np.asarray(a, dtype=np.int64) % 3
    rows, cols = a.shape
    a = a.copy()
    r = 0
    for c in range(cols):
        hit = next((i for i in range(r, rows) if a[i, c]), None)
        if hit is None:
            continue
        a[[r, hit]] = a[[hit, r]]
        a[r] = (a[r] * a[r, c]) % 3
        for i in range(rows):
            if i != r and a[i, c]:
                a[i] = (a[i] - a[i, c] * a[r]) % 3
        r += 1
    return r


def abar_basis_expand(tree: MarkedBinaryTree, lam: Sequence[int], indices: Sequence[int] | None = None,
                      rotation: int = 1) -> dict[str, int]:
    """Coefficients c_v with Lambda = sum c_v Abar_v mod Diag."""
    lam = np.asarray(lam, dtype=np.int64) % 3
    if indices is not None and not in_kernel(indices, lam):
        raise TreeError("Lambda is not in Ker(Pi)", tuple(int(x) for x in lam))
    order = tree.inner_order()
    mat = np.concatenate([abar_matrix(tree, rotation), np.ones((tree.m, 1), dtype=np.int64)], axis=1)
    x = f3_solve(mat, lam)
    if x is None:
        raise TreeError("Lambda is not in the span of the Abar classes", tuple(int(v) for v in lam))
    return {v: int(c) for v, c in zip(order, x[:-1])}


def abar_combination(tree: MarkedBinaryTree, coeffs: dict[str, int], rotation: int = 1) -> F3Class:
    out = F3Class(tuple([0] * tree.m))
    for v, c in coeffs.items():
        out = out + class_abar(tree, v, rotation).scale(c)
    return out


def kernel_classes(indices: Sequence[int]) -> list[tuple[int, ...]]:
    """Canonical representatives of Ker(Pi)/Diag (brute force, small m)."""
    m = len(indices)
    seen = set()
    for vec in itertools.product(range(3), repeat=m - 1):
        full = (0,) + vec
        if in_kernel(indices, full):
            seen.add(full)
    return sorted(seen)


# -- equi-distribution ------------------------------------------------------


def distribution_counts(indices: Sequence[int], lam: Sequence[int]) -> dict[str, list[int]]:
    white = [0, 0, 0]
    black = [0, 0, 0]
    for a, k in zip(indices, lam):
        (white if a == 1 else black)[int(k) % 3] += 1
    return {"white": white, "black": black}


def is_equidistributed(indices, lam: Sequence[int]) -> bool:
    if isinstance(indices, BranchConfig):
        indices = indices.indices
    c = distribution_counts(indices, lam)
    d = [w - b for w, b in zip(c["white"], c["black"])]
    eq = d[0] == d[1] == d[2]
    if eq:
        assert in_kernel(indices, lam)
    return eq


def equidistributed_vectors(indices: Sequence[int]) -> list[tuple[int, ...]]:
    return [v for v in itertools.product(range(3), repeat=len(indices)) if is_equidistributed(indices, v)]


# --------------------------------------------------------------------------
# decomposition along an inner edge
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SubTree:
    """One side of a cut: a tree on local branch indices plus the map back.

    ``origin[j]`` is the original branch index of local terminal j, or None for
    the terminal inserted at the cut.
    """

    tree: MarkedBinaryTree
    indices: tuple[int, ...]
    origin: tuple[int | None, ...]

    @property
    def new_terminal(self) -> int:
        return self.origin.index(None)


def _orient_edge(tree: MarkedBinaryTree, edge: tuple[str, str]) -> tuple[str, str]:
    a, b = edge
    if not (tree.is_inner(a) and tree.is_inner(b)):
        raise TreeError("edge is a terminal edge", f"{a}-{b}")
    if b not in tree.vertex(a).adj:
        raise TreeError("not an edge", f"{a}-{b}")
    if tree.vertex(a).color == WHITE:
        return a, b
    return b, a


def _side(tree: MarkedBinaryTree, config_indices: Sequence[int], keep: str, drop: str,
          new_color: str) -> SubTree:
    comp = tree.component(drop, keep)
    leaves_kept = sorted(tree.branch_of(x) for x in comp if not tree.is_inner(x))
    new_id = f"{drop}*"
    # local numbering: kept terminals in increasing original index, new terminal last
    local = {b: j for j, b in enumerate(leaves_kept)}
    inner = []
    for x in comp:
        if tree.is_inner(x):
            v = tree.vertex(x)
            adj = tuple(new_id if u == drop else u for u in v.adj)
            mark = new_id if v.mark == drop else v.mark
            inner.append(InnerVertex(v.id, v.color, adj, mark))
    inner.sort(key=lambda v: v.id)
    leaves = [Leaf(l.id, local[l.branch]) for l in tree.leaves if l.id in comp]
    leaves.append(Leaf(new_id, len(leaves_kept)))
    indices = [config_indices[b] for b in leaves_kept] + [1 if new_color == WHITE else 2]
    origin = tuple(leaves_kept) + (None,)
    return SubTree(MarkedBinaryTree(tuple(inner), tuple(leaves)), tuple(indices), origin)


def decompose(tree: MarkedBinaryTree, indices: Sequence[int], edge: tuple[str, str]) -> tuple[SubTree, SubTree]:
    """Cut an inner edge (p white, q black) into trees on C_p and C_q."""
    p, q = _orient_edge(tree, edge)
    tree_p = _side(tree, indices, p, q, BLACK)
    tree_q = _side(tree, indices, q, p, WHITE)
    return tree_p, tree_q


def split_class(tree: MarkedBinaryTree, indices: Sequence[int], edge: tuple[str, str],
                lam: Sequence[int], rotation: int = 1) -> tuple[F3Class, F3Class]:
    """Lambda = Lambda_p + Lambda_q with Lambda_p in H_p, Lambda_q in H_q, in local coordinates."""
    lam = np.asarray(lam, dtype=np.int64) % 3
    if not in_kernel(indices, lam):
        raise TreeError("Lambda is not in Ker(Pi)", tuple(int(x) for x in lam))
    p, q = _orient_edge(tree, edge)
    side_p = tree.component(q, p)
    coeffs = abar_basis_expand(tree, lam, indices, rotation)
    part_p = abar_combination(tree, {v: c for v, c in coeffs.items() if v in side_p}, rotation)
    part_q = abar_combination(tree, {v: c for v, c in coeffs.items() if v not in side_p}, rotation)
    tree_p, tree_q = decompose(tree, indices, edge)
    return _localize(part_p, tree_p), _localize(part_q, tree_q)


def _localize(cls: F3Class, sub: SubTree) -> F3Class:
    """Restrict a class constant on the far side to the subtree's terminals."""
    full = cls.coeffs
    far = [i for i in range(len(full)) if i not in sub.origin]
    values = {full[i] for i in far}
    if len(values) > 1:
        raise TreeError("class is not constant on the far block", full)
    c = values.pop() if values else 0
    local = [full[o] if o is not None else c for o in sub.origin]
    out = F3Class(tuple(local))
    assert in_kernel(sub.indices, local)
    return out


def globalize(cls: F3Class, sub: SubTree, m: int) -> F3Class:
    """Inverse of the natural isomorphism H(Gamma_p) -> H_p."""
    c = cls.coeffs[sub.new_terminal]
    full = [c] * m
    for j, o in enumerate(sub.origin):
        if o is not None:
            full[o] = cls.coeffs[j]
    return F3Class(tuple(full))


def h_subspace(tree: MarkedBinaryTree, indices: Sequence[int], edge: tuple[str, str], side: str) -> set:
    """H_p (side='p') or H_q as a set of canonical representatives (brute force)."""
    p, q = _orient_edge(tree, edge)
    far = tree.component(p, q) if side == "p" else tree.component(q, p)
    far_leaves = [tree.branch_of(x) for x in far if not tree.is_inner(x)]
    out = set()
    for vec in kernel_classes(indices):
        for shift in range(3):
            rep = [(x + shift) % 3 for x in vec]
            if len({rep[i] for i in far_leaves}) <= 1:
                out.add(normalize(rep))
                break
    return out


# --------------------------------------------------------------------------
# simple degeneration of two adjacent terminals
# --------------------------------------------------------------------------


def cherry_vertex(tree: MarkedBinaryTree, i: int, j: int) -> str:
    """The inner vertex adjacent to terminals i and j, if any."""
    li, lj = tree.leaf_of_branch(i), tree.leaf_of_branch(j)
    (u,) = tree.neighbours(li.id)
    (w,) = tree.neighbours(lj.id)
    if u != w:
        raise TreeError("terminals are not adjacent to a common inner vertex", (i, j))
    return u


def degenerate_class(lam: Sequence[int], i: int, indices: Sequence[int] | None = None,
                     j: int | None = None) -> tuple[int, ...]:
    """Lambda' = -(k_i + k_j) e_tilde + sum_{l != i, j} k_l e_l; tilde sits at position min(i, j).

    By default j = i + 1.
    """
    j = i + 1 if j is None else j
    lam = [int(x) % 3 for x in lam]
    if not (0 <= i < len(lam) and 0 <= j < len(lam)) or i == j:
        raise TreeError("merge indices out of range", (i, j))
    if indices is not None and indices[i] != indices[j]:
        raise TreeError("merged terminals must have the same colour", (i, j))
    lo = min(i, j)
    out = []
    for l, k in enumerate(lam):
        if l == lo:
            out.append((-(lam[i] + lam[j])) % 3)
        elif l in (i, j):
            continue
        else:
            out.append(k)
    out_t = tuple(out)
    if indices is not None and lam[i] != lam[j] and is_equidistributed(indices, lam):
        assert is_equidistributed(merged_indices(indices, i, j), out_t)
    return out_t


def merged_indices(indices: Sequence[int], i: int, j: int | None = None) -> tuple[int, ...]:
    j = i + 1 if j is None else j
    lo = min(i, j)
    new = (indices[i] + indices[j]) % 3
    out = []
    for l, a in enumerate(indices):
        if l == lo:
            out.append(new)
        elif l in (i, j):
            continue
        else:
            out.append(a)
    return tuple(out)


def merged_tree(tree: MarkedBinaryTree, i: int, j: int | None = None) -> MarkedBinaryTree:
    """Tree Gamma' after collapsing the cherry (i, j) into one terminal at position min(i, j)."""
    j = i + 1 if j is None else j
    p = cherry_vertex(tree, i, j)
    vert = tree.vertex(p)
    li, lj = tree.leaf_of_branch(i).id, tree.leaf_of_branch(j).id
    (q,) = [u for u in vert.adj if u not in (li, lj)]
    lo, hi = min(i, j), max(i, j)

    def renum(b: int) -> int:
        return b if b < hi else b - 1

    new_leaf = Leaf(p, lo)
    leaves = [Leaf(l.id, renum(l.branch)) for l in tree.leaves if l.id not in (li, lj)] + [new_leaf]
    inner = [v for v in tree.inner if v.id != p]
    return MarkedBinaryTree(tuple(inner), tuple(sorted(leaves, key=lambda l: l.branch)))


def merge_vertex_ok(tree: MarkedBinaryTree, i: int, j: int | None = None) -> bool:
    """Cherry (i, j) whose vertex marks the third edge (simple degeneration setup)."""
    j = i + 1 if j is None else j
    try:
        p = cherry_vertex(tree, i, j)
    except TreeError:
        return False
    vert = tree.vertex(p)
    return vert.mark not in (tree.leaf_of_branch(i).id, tree.leaf_of_branch(j).id)


# --------------------------------------------------------------------------
# random trees
# --------------------------------------------------------------------------


def random_tree(leaf_cycle: Sequence[int], indices: Sequence[int], rng: np.random.Generator) -> MarkedBinaryTree:
    """Uniformly random planar binary tree with anticlockwise leaf order ``leaf_cycle``, random marks."""
    shapes = all_trees(leaf_cycle, indices)
    if not shapes:
        raise TreeError("no compatible tree for this leaf order", tuple(leaf_cycle))
    tree = shapes[int(rng.integers(len(shapes)))]
    return with_marks(tree, {v.id: v.adj[int(rng.integers(3))] for v in tree.inner})


def all_trees(leaf_cycle: Sequence[int], indices: Sequence[int]) -> list[MarkedBinaryTree]:
    """Every planar binary tree (unmarked; marks on the first rotation slot) with this leaf order."""
    colour = {1: WHITE, 2: BLACK}
    out: list[MarkedBinaryTree] = []
    seen = set()

    def rec(items, rotations, colours, counter):
        if len(items) == 3:
            if len({c for _, c in items}) != 1:
                return
            root = f"v{counter}"
            rot = dict(rotations)
            col = dict(colours)
            col[root] = BLACK if items[0][1] == WHITE else WHITE
            rot[root] = [x for x, _ in items]
            parent = {x: vid for vid, r in rot.items() for x in r if x != "PARENT"}
            inner = []
            for vid, r in rot.items():
                adj = tuple(parent[vid] if x == "PARENT" else x for x in r)
                inner.append(InnerVertex(vid, col[vid], adj, adj[0]))
            tree = MarkedBinaryTree(tuple(sorted(inner, key=lambda v: v.id)),
                                    tuple(Leaf(f"L{b}", b) for b in sorted(leaf_cycle)))
            key = _shape_key(tree)
            if key not in seen:
                seen.add(key)
                out.append(tree)
            return
        for k in range(len(items)):
            x, cx = items[k]
            y, cy = items[(k + 1) % len(items)]
            if cx != cy:
                continue
            vid = f"v{counter}"
            c = BLACK if cx == WHITE else WHITE
            rot = dict(rotations)
            col = dict(colours)
            rot[vid] = [x, y, "PARENT"]
            col[vid] = c
            if k + 1 < len(items):
                nxt = items[:k] + [(vid, c)] + items[k + 2:]
            else:
                nxt = [(vid, c)] + items[1:-1]
            rec(nxt, rot, col, counter + 1)

    rec([(f"L{b}", colour[indices[b]]) for b in leaf_cycle], {}, {}, 0)
    return out


def _shape_key(tree: MarkedBinaryTree) -> frozenset:
    """Splits induced by inner edges and cherries; identifies equal planar trees."""
    splits = set()
    for v in tree.inner:
        for u in v.adj:
            splits.add(frozenset(tree.subtree_leaves(v.id, u)))
    return frozenset(splits)


def with_marks(tree: MarkedBinaryTree, marks: dict[str, str]) -> MarkedBinaryTree:
    inner = tuple(InnerVertex(v.id, v.color, v.adj, marks.get(v.id, v.mark)) for v in tree.inner)
    return MarkedBinaryTree(inner, tree.leaves)


def all_markings(tree: MarkedBinaryTree) -> Iterable[MarkedBinaryTree]:
    for choice in itertools.product(range(3), repeat=len(tree.inner)):
        yield with_marks(tree, {v.id: v.adj[c] for v, c in zip(tree.inner, choice)})


def all_marked_trees(leaf_cycle: Sequence[int], indices: Sequence[int]) -> Iterable[MarkedBinaryTree]:
    for tree in all_trees(leaf_cycle, indices):
        yield from all_markings(tree)


def colour_patterns(m: int) -> list[tuple[int, ...]]:
    """Index vectors in {1, 2}^m with sum divisible by 3, one per rotation class."""
    out = []
    for vec in itertools.product((1, 2), repeat=m):
        if sum(vec) % 3:
            continue
        if min(vec[k:] + vec[:k] for k in range(m)) == vec:
            out.append(vec)
    return out
