"""Lifted cycles on y^3 = prod (x - lambda_i)^a_i built from a marked binary tree.

Model
-----
A base point ``b`` is placed outside the convex hull of the branch points and
joined to every lambda_k by a straight spoke.  The plane is cut along the rays
that continue each spoke beyond its branch point.  On the cut plane the three
determinations of y_1 are labelled by sheets s in Z/3 through
``y_1 = omega^s * Y`` where ``Y`` is a fixed reference branch, so the deck
transformation (x, y) -> (x, omega y) adds 1 to every sheet label.

The loop gamma_k^(s) leaves b on sheet s, runs along the spoke to lambda_k,
turns once anticlockwise around it (crossing the cut, which moves the sheet
to s + a_k) and returns.  A cycle is an integer combination of such loops;
it is closed exactly when its boundary, a combination of sheets at b, is zero.

For an inner vertex v with blocks (B1, B2, B3), A_v is the lift of the loop
around B2 minus the lift of the loop around B1, both started on the same
sheet.  The anticlockwise leaf order of the tree must agree with the
clockwise order of the spokes around b, which is how b is chosen.
"""
from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .trees import (BLACK, WHITE, BranchConfig, F3Class, MarkedBinaryTree, TreeError, blocks_at,
                    check_tree)


class CycleError(RuntimeError):
    """Routing or homology check failed."""


# --------------------------------------------------------------------------
# base point and spokes
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SpokeFrame:
    config: BranchConfig
    base: complex
    order: tuple[int, ...]  # spokes anticlockwise around the base point
    margin: float  # smallest distance of a branch point to another spoke line

    @property
    def radius(self) -> float:
        """Loop radius used when a cycle is drawn as polylines."""
        return 0.25 * min(self.margin, self.config.min_distance())

    def cut_direction(self, k: int) -> complex:
        d = self.config.points[k] - self.base
        return d / abs(d)


def spoke_order(points, base: complex) -> list[int]:
    """Indices sorted anticlockwise as seen from ``base`` (the sweep starts opposite the centroid)."""
    pts = np.asarray(points, dtype=complex)
    ref = np.mean(pts) - base
    ang = np.angle((pts - base) / ref)
    return [int(i) for i in np.argsort(ang)]


def _line_margin(points, base: complex) -> float:
    pts = np.asarray(points, dtype=complex)
    best = math.inf
    for k, p in enumerate(pts):
        d = (p - base) / abs(p - base)
        for j, q in enumerate(pts):
            if j == k:
                continue
            off = q - base
            along = (off * np.conj(d)).real
            if along <= 0:
                dist = abs(off)
            else:
                dist = abs((off * np.conj(d)).imag)
            best = min(best, dist)
    return float(best)


def _cyclic_equal(a, b) -> bool:
    if len(a) != len(b):
        return False
    if not a:
        return True
    try:
        k = list(b).index(a[0])
    except ValueError:
        return False
    return list(b[k:]) + list(b[:k]) == list(a)


def choose_base_point(config: BranchConfig, leaf_cycle=None, directions: int = 720) -> SpokeFrame:
    """Base point whose clockwise spoke order equals ``leaf_cycle`` (any order if None).

    Among the admissible directions the one with the largest line margin wins.
    """
    pts = np.asarray(config.points, dtype=complex)
    centre = pts.mean()
    spread = max(np.abs(pts - centre).max(), 1e-300)
    best = None
    for scale in (1.6, 3.0, 6.0):
        for k in range(directions):
            phi = 2 * math.pi * (k + 0.5) / directions
            b = complex(centre + scale * spread * np.exp(1j * phi))
            order = spoke_order(pts, b)
            if leaf_cycle is not None and not _cyclic_equal(list(leaf_cycle), order[::-1]):
                continue
            margin = _line_margin(pts, b)
            if best is None or margin > best[0] * (1 + 1e-12):
                best = (margin, b, tuple(order))
    if best is None:
        raise CycleError("no base point realises the leaf order of the tree")
    margin, b, order = best
    if margin < 1e-9 * spread:
        raise CycleError("branch points too close to collinear with every admissible base point")
    return SpokeFrame(config, b, order, margin)


def frame_for(config: BranchConfig, tree: MarkedBinaryTree | None) -> SpokeFrame:
    return choose_base_point(config, tree.leaf_cycle() if tree is not None else None)


# --------------------------------------------------------------------------
# chains of lifted loops
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftedCycle:
    """Integer combination of lifted loops gamma_k^(s), stored as ((k, s), n) pairs."""

    terms: tuple[tuple[tuple[int, int], int], ...]
    indices: tuple[int, ...]
    label: str = ""

    @classmethod
    def from_dict(cls, coeffs: dict, indices, label: str = "") -> "LiftedCycle":
        clean = {}
        for (k, s), n in coeffs.items():
            key = (int(k), int(s) % 3)
            clean[key] = clean.get(key, 0) + int(n)
        terms = tuple(sorted((key, n) for key, n in clean.items() if n))
        return cls(terms, tuple(indices), label)

    def as_dict(self) -> dict:
        return dict(self.terms)

    def __add__(self, other: "LiftedCycle") -> "LiftedCycle":
        d = defaultdict(int, self.as_dict())
        for key, n in other.terms:
            d[key] += n
        return LiftedCycle.from_dict(d, self.indices, self.label)

    def __neg__(self) -> "LiftedCycle":
        return LiftedCycle.from_dict({key: -n for key, n in self.terms}, self.indices, self.label)

    def __sub__(self, other: "LiftedCycle") -> "LiftedCycle":
        return self + (-other)

    def scale(self, c: int) -> "LiftedCycle":
        return LiftedCycle.from_dict({key: c * n for key, n in self.terms}, self.indices, self.label)

    def relabel(self, label: str) -> "LiftedCycle":
        return LiftedCycle(self.terms, self.indices, label)

    def boundary(self) -> dict[int, int]:
        """Coefficients of the base-point lifts b(s) in the boundary."""
        out = defaultdict(int)
        for (k, s), n in self.terms:
            out[(s + self.indices[k]) % 3] += n
            out[s] -= n
        return {s: n for s, n in sorted(out.items()) if n}

    @property
    def is_closed(self) -> bool:
        return not self.boundary()


def rho(cycle: LiftedCycle, power: int = 1) -> LiftedCycle:
    """Deck transformation (x, y) -> (x, omega y): every sheet label moves by one."""
    return LiftedCycle.from_dict({(k, s + power): n for (k, s), n in cycle.terms}, cycle.indices, cycle.label)


def lift_word(word, start_sheet: int, indices) -> tuple[dict, int]:
    """Lift a product of spoke loops (traversal order) from ``start_sheet``; returns chain and end sheet."""
    s = start_sheet % 3
    out = defaultdict(int)
    for k in word:
        out[(k, s)] += 1
        s = (s + indices[k]) % 3
    return dict(out), s


def block_word(frame: SpokeFrame, block) -> list[int]:
    """Spoke loops around a block, most clockwise first (a simple loop around the block)."""
    order = list(frame.order)
    pos = {k: i for i, k in enumerate(order)}
    members = sorted(block, key=lambda k: pos[k])
    n = len(order)
    if len(members) == n:
        return members
    # the block is a cyclic interval of the spoke order; start just after the gap
    present = [k in set(block) for k in order]
    start = next(i for i in range(n) if present[i] and not present[i - 1])
    return [order[(start + j) % n] for j in range(len(members))]


def build_gamma(frame: SpokeFrame, i: int) -> LiftedCycle:
    """gamma_i started on b(1) for white lambda_i and b(2) for black; eps_i * gamma_i has boundary b(2) - b(1)."""
    a = frame.config.indices[i]
    start = 1 if a == 1 else 2
    chain, _ = lift_word([i], start, frame.config.indices)
    return LiftedCycle.from_dict(chain, frame.config.indices, f"gamma_{i}")


START_SHEET = {WHITE: 2, BLACK: 1}


@dataclass
class SymplecticBasis:
    tree: MarkedBinaryTree
    frame: SpokeFrame
    vertices: list[str]
    A: list[LiftedCycle]
    B: list[LiftedCycle]
    rotation: int = 1
    intersection_matrix: np.ndarray | None = field(default=None, repr=False)

    @property
    def cycles(self) -> list[LiftedCycle]:
        return self.A + self.B

    @property
    def genus(self) -> int:
        return len(self.A)


def build_a_cycle(frame: SpokeFrame, tree: MarkedBinaryTree, v: str, rotation: int = 1) -> LiftedCycle:
    b1, b2, _ = blocks_at(tree, v, rotation)
    s0 = START_SHEET[tree.vertex(v).color]
    ind = frame.config.indices
    c2, e2 = lift_word(block_word(frame, b2), s0, ind)
    c1, e1 = lift_word(block_word(frame, b1), s0, ind)
    if e1 != e2:
        raise CycleError(f"blocks at {v} have different monodromy")
    cyc = LiftedCycle.from_dict(c2, ind) - LiftedCycle.from_dict(c1, ind)
    return cyc.relabel(f"A_{v}")


def b_from_a(a_cycle: LiftedCycle, color: str) -> LiftedCycle:
    """B_v = rho(A_v) for white v, rho^2(A_v) for black v."""
    return rho(a_cycle, 1 if color == WHITE else 2)


def build_symplectic_basis(config: BranchConfig, tree: MarkedBinaryTree, frame: SpokeFrame | None = None,
                           rotation: int = 1, check: bool = True) -> SymplecticBasis:
    check_tree(tree, config)
    frame = frame or frame_for(config, tree)
    verts = tree.inner_order()
    A, B = [], []
    for v in verts:
        a = build_a_cycle(frame, tree, v, rotation)
        A.append(a)
        B.append(b_from_a(a, tree.vertex(v).color).relabel(f"B_{v}"))
    basis = SymplecticBasis(tree, frame, verts, A, B, rotation)
    if check:
        check_basis(basis)
    return basis


def standard_form(g: int) -> np.ndarray:
    """Intersection matrix of (A_1..A_g, B_1..B_g) with (A_v, B_w) = -delta."""
    j = np.zeros((2 * g, 2 * g), dtype=np.int64)
    j[:g, g:] = -np.eye(g, dtype=np.int64)
    j[g:, :g] = np.eye(g, dtype=np.int64)
    return j


def check_basis(basis: SymplecticBasis) -> None:
    for c in basis.cycles:
        if not c.is_closed:
            raise CycleError(f"{c.label} is not closed: boundary {c.boundary()}")
    mat = intersection_matrix(basis.cycles, basis.frame)
    basis.intersection_matrix = mat
    if not np.array_equal(mat, standard_form(basis.genus)):
        raise CycleError(f"intersection matrix is not standard:\n{mat}")
    for v, a in zip(basis.vertices, basis.A):
        from .trees import class_abar

        if class_in_H(a) != class_abar(basis.tree, v, basis.rotation):
            raise CycleError(f"class of (1 - rho)/3 {a.label} differs from the tree class")


def class_in_H(cycle: LiftedCycle) -> F3Class:
    """F_3 class of (1 - rho)/3 * cycle: per branch point, the total loop count mod 3."""
    if not cycle.is_closed:
        raise CycleError("class_in_H needs a closed cycle")
    m = len(cycle.indices)
    vec = [0] * m
    for (k, _s), n in cycle.terms:
        vec[k] += n
    return F3Class(tuple(vec))


# --------------------------------------------------------------------------
# geometric realisation and intersection numbers
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LiftedPath:
    """Closed polyline from the base point with the sheet it starts on and a coefficient."""

    points: np.ndarray
    start_sheet: int
    coef: int
    branch: int
    cut_index: int  # index of the segment that crosses the cut of ``branch``
    cut_param: float


def loop_polyline(frame: SpokeFrame, k: int, base: complex, radius: float, n_circle: int = 48):
    """Spoke from ``base``, anticlockwise circle of ``radius`` around lambda_k, spoke back.

    Returns points plus the segment index and parameter where the circle meets the cut ray.
    """
    lam = frame.config.points[k]
    back = (base - lam) / abs(base - lam)
    theta0 = math.atan2(back.imag, back.real)
    cut = frame.cut_direction(k)
    theta_cut = math.atan2(cut.imag, cut.real)
    angles = theta0 + 2 * math.pi * np.arange(n_circle + 1) / n_circle
    circle = lam + radius * np.exp(1j * angles)
    pts = np.concatenate([[base], circle, [base]])
    # cut crossing: on the polygon edge whose angular range contains theta_cut
    rel = (theta_cut - theta0) % (2 * math.pi)
    seg = int(rel // (2 * math.pi / n_circle))
    p, q = circle[seg], circle[seg + 1]
    # intersect segment p->q with the ray lam + s*cut
    d = q - p
    denom = (np.conj(cut) * d).imag
    tpar = -((np.conj(cut) * (p - lam)).imag) / denom if denom != 0 else 0.5
    return pts, seg + 1, float(min(max(tpar, 0.0), 1.0))


def realise(cycle: LiftedCycle, frame: SpokeFrame, base: complex, radius: float, n_circle: int = 48) -> list[LiftedPath]:
    out = []
    for (k, s), n in cycle.terms:
        pts, seg, tpar = loop_polyline(frame, k, base, radius, n_circle)
        out.append(LiftedPath(pts, s, n, k, seg, tpar))
    return out


def _sheet_at(path: LiftedPath, seg: int, t: float, indices) -> int:
    if seg < path.cut_index or (seg == path.cut_index and t < path.cut_param):
        return path.start_sheet
    return (path.start_sheet + indices[path.branch]) % 3


def _segment_crossings(p: np.ndarray, q: np.ndarray):
    """All proper crossings between polylines p and q: (i, s, j, t, sign)."""
    a0, a1 = p[:-1], p[1:]
    b0, b1 = q[:-1], q[1:]
    da = (a1 - a0)[:, None]
    db = (b1 - b0)[None, :]
    denom = (np.conj(da) * db).imag
    off = b0[None, :] - a0[:, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        s = (np.conj(off) * db).imag / denom
        t = (np.conj(off) * da).imag / denom
    hit = (denom != 0) & (s >= 0) & (s < 1) & (t >= 0) & (t < 1)
    ii, jj = np.nonzero(hit)
    return [(int(i), float(s[i, j]), int(j), float(t[i, j]), 1 if denom[i, j] > 0 else -1) for i, j in zip(ii, jj)]


class _CrossingTable:
    """Crossings between drawn loops, cached per pair of branch points.

    Each entry is a list of (past_cut_1, past_cut_2, sign); a loop started on
    sheet s is on sheet s + a_k after it crosses the cut of its branch point.
    """

    def __init__(self, frame: SpokeFrame, seed: int = 0):
        rng = np.random.default_rng(seed)
        r = frame.radius
        spread = r * 0.2
        self.frame = frame
        self.b1 = frame.base + spread * complex(*rng.normal(size=2))
        self.b2 = frame.base + spread * complex(*rng.normal(size=2))
        self.r1, self.r2 = r, 0.55 * r
        self._cache: dict[tuple[int, int], list[tuple[bool, bool, int]]] = {}

    def _loops(self, k: int, which: int) -> LiftedPath:
        b, r = (self.b1, self.r1) if which == 1 else (self.b2, self.r2)
        pts, seg, tpar = loop_polyline(self.frame, k, b, r)
        return LiftedPath(pts, 0, 1, k, seg, tpar)

    def crossings(self, k1: int, k2: int) -> list[tuple[bool, bool, int]]:
        key = (k1, k2)
        if key not in self._cache:
            p1, p2 = self._loops(k1, 1), self._loops(k2, 2)
            ind = self.frame.config.indices
            self._cache[key] = [(_sheet_at(p1, i, s, ind) != 0, _sheet_at(p2, j, t, ind) != 0, sign)
                                for i, s, j, t, sign in _segment_crossings(p1.points, p2.points)]
        return self._cache[key]

    def intersection(self, c1: LiftedCycle, c2: LiftedCycle) -> int:
        ind = self.frame.config.indices
        total = 0
        for (k1, s1), n1 in c1.terms:
            for (k2, s2), n2 in c2.terms:
                for past1, past2, sign in self.crossings(k1, k2):
                    if (s1 + past1 * ind[k1] - s2 - past2 * ind[k2]) % 3 == 0:
                        total += sign * n1 * n2
        return total


def intersection(c1: LiftedCycle, c2: LiftedCycle, frame: SpokeFrame, seed: int = 0) -> int:
    """Algebraic intersection number of two closed cycles.

    The first cycle is drawn from a perturbed base point with loop radius r, the
    second from another one with radius 0.55 r; each transverse crossing of the
    projections where the two sheets agree contributes sign(d1 x d2) times the
    two coefficients.
    """
    if not (c1.is_closed and c2.is_closed):
        raise CycleError("intersection needs closed cycles")
    return _CrossingTable(frame, seed).intersection(c1, c2)


def intersection_matrix(cycles, frame: SpokeFrame, seed: int = 0) -> np.ndarray:
    if not all(c.is_closed for c in cycles):
        raise CycleError("intersection needs closed cycles")
    table = _CrossingTable(frame, seed)
    n = len(cycles)
    mat = np.zeros((n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if i != j:
                mat[i, j] = table.intersection(cycles[i], cycles[j])
    if not np.array_equal(mat, -mat.T):
        raise CycleError(f"intersection matrix is not antisymmetric:\n{mat}")
    return mat


def cycle_to_json(cycle: LiftedCycle, frame: SpokeFrame) -> dict:
    return {
        "label": cycle.label,
        "loops": [{"branch": k, "sheet": s, "coef": n} for (k, s), n in cycle.terms],
        "base": [frame.base.real, frame.base.imag],
    }
