"""Degenerating families: merging two terminals and rotating a cluster.

Limits are taken along a t-sequence and extrapolated with polynomial
(Richardson) extrapolation in h = t^(1/3).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .cycles import (LiftedCycle, SpokeFrame, _cyclic_equal, _line_margin, build_symplectic_basis,
                     choose_base_point, realise, spoke_order)
from .periods import (OMEGA, DifferentialBasis, Form, cycle_periods, integrate_polyline, sheet_values,
                      spoke_integrals)
from .quadrature import beta
from .theta import Characteristic, characteristic_of, chowla_selberg_value, theta_constant
from .trees import (WHITE, blocks_at, BranchConfig, MarkedBinaryTree, TreeError, check_tree, cherry_vertex,
                    degenerate_class, is_equidistributed, merge_vertex_ok, merged_indices, merged_tree)

DEFAULT_T = (1e-2, 1e-3, 1e-4, 1e-5)


class DegenerationError(ArithmeticError):
    pass


# --------------------------------------------------------------------------
# families
# --------------------------------------------------------------------------


def family_merge(config: BranchConfig, i: int, lambda_tilde: complex, t: float, j: int | None = None) -> BranchConfig:
    """lambda_k(t) = lambda_tilde + t (lambda_k - lambda_tilde) for k = i, j (default j = i + 1)."""
    j = i + 1 if j is None else j
    if not 0 < t <= 1:
        raise ValueError("t must lie in (0, 1]")
    pts = list(config.points)
    for k in (i, j):
        pts[k] = lambda_tilde + t * (pts[k] - lambda_tilde)
    out = BranchConfig(tuple(pts), config.indices)
    if out.problems():
        raise DegenerationError(f"collision in merge family at t = {t}")
    return out


def family_scale(config: BranchConfig, subset: Sequence[int], t: complex) -> BranchConfig:
    """lambda_k(t) = t lambda_k for k in subset."""
    if t == 0:
        raise DegenerationError("t = 0 collapses the subset")
    pts = list(config.points)
    for k in subset:
        pts[k] = t * pts[k]
    out = BranchConfig(tuple(pts), config.indices)
    if out.problems():
        raise DegenerationError(f"collision in scale family at t = {t}")
    return out


def limit_config(config: BranchConfig, i: int, lambda_tilde: complex, j: int | None = None) -> BranchConfig:
    j = i + 1 if j is None else j
    lo, hi = min(i, j), max(i, j)
    pts = [lambda_tilde if k == lo else p for k, p in enumerate(config.points) if k != hi]
    return BranchConfig(tuple(pts), merged_indices(config.indices, i, j))


# --------------------------------------------------------------------------
# extrapolation
# --------------------------------------------------------------------------


def richardson(hs: Sequence[float], values: Sequence[complex]) -> tuple[complex, float]:
    """Value at h = 0 of the interpolating polynomial; error from dropping the coarsest point."""
    hs = np.asarray(hs, dtype=float)
    vals = np.asarray(values, dtype=complex)

    def neville(h, v):
        p = list(v)
        n = len(h)
        for k in range(1, n):
            for a in range(n - k):
                b = a + k
                p[a] = (h[b] * p[a] - h[a] * p[a + 1]) / (h[b] - h[a])
        return p[0]

    full = neville(hs, vals)
    if len(hs) > 2:
        fine = neville(hs[1:], vals[1:])
        err = abs(full - fine)
    else:
        err = math.inf
    return complex(full), float(err)


def loglog_slope(ts, values) -> float:
    x = np.log(np.asarray(ts, dtype=float))
    y = np.log(np.abs(np.asarray(values, dtype=complex)))
    return float(np.polyfit(x, y, 1)[0])


# --------------------------------------------------------------------------
# merge setup
# --------------------------------------------------------------------------


@dataclass
class MergeSetup:
    config: BranchConfig
    tree: MarkedBinaryTree
    i: int
    j: int
    lambda_tilde: complex
    p: str
    white: bool
    base: complex
    limit: BranchConfig
    limit_tree: MarkedBinaryTree
    first: int  # terminal in the first block at p
    second: int

    @property
    def blow_kind(self) -> int:
        """The cube root whose forms blow up on B_p: y2 for a white pair, y1 for a black one."""
        return 2 if self.white else 1


def _frame_at(config: BranchConfig, base: complex) -> SpokeFrame:
    order = spoke_order(config.points, base)
    return SpokeFrame(config, base, tuple(order), _line_margin(config.points, base))


def merge_setup(config: BranchConfig, tree: MarkedBinaryTree, i: int, lambda_tilde: complex | None = None,
                j: int | None = None, t_min: float = 1e-6, t_grid: Sequence[float] = (1.0,)) -> MergeSetup:
    j = i + 1 if j is None else j
    check_tree(tree, config)
    if not merge_vertex_ok(tree, i, j):
        raise TreeError("terminals must form a cherry whose vertex marks its third edge", (i, j))
    if lambda_tilde is None:
        lambda_tilde = 0.5 * (config.points[i] + config.points[j])
    p = cherry_vertex(tree, i, j)
    lim = limit_config(config, i, lambda_tilde, j)
    lim.validate()
    ltree = merged_tree(tree, i, j)
    # one base point serves every t and the limit curve, so sheet labels agree along the family
    family = [(family_merge(config, i, lambda_tilde, t, j).points, tree.leaf_cycle())
              for t in sorted(set(t_grid) | {t_min})]
    family.append((lim.points, ltree.leaf_cycle()))
    b = common_base_point(config, family)
    white = config.indices[i] == 1
    b1, b2, _ = blocks_at(tree, p)
    first, second = (i, j) if i in b1 else (j, i)
    return MergeSetup(config, tree, i, j, lambda_tilde, p, white, b, lim, ltree, first, second)


def common_base_point(config: BranchConfig, family, directions: int = 720) -> complex:
    """Base point realising each (points, leaf cycle) pair; ties broken by the smallest line margin."""
    pts = np.asarray(config.points, dtype=complex)
    centre = pts.mean()
    spread = np.abs(pts - centre).max()
    best = None
    for scale in (1.6, 3.0, 6.0):
        for k in range(directions):
            b = complex(centre + scale * spread * cmath.exp(2j * math.pi * (k + 0.5) / directions))
            if not all(_cyclic_equal(list(cyc), spoke_order(p, b)[::-1]) for p, cyc in family):
                continue
            margin = min(_line_margin(family[-1][0], b), _line_margin(pts, b))
            if best is None or margin > best[0]:
                best = (margin, b)
    if best is None:
        raise DegenerationError("no common base point for the family and its limit")
    return best[1]


def adapted_forms(setup: MergeSetup, config: BranchConfig) -> list[Form]:
    """Standard basis with the blow-up kind recentred at lambda_tilde (a unipotent change)."""
    forms = DifferentialBasis.for_config(config).forms
    return [Form(f.kind, f.power, setup.lambda_tilde if f.kind == setup.blow_kind else 0j) for f in forms]


@dataclass
class FamilyPoint:
    t: float
    P_A: np.ndarray
    P_B: np.ndarray
    P_B_std: np.ndarray
    vertices: list[str]


def family_point(setup: MergeSetup, t: float) -> FamilyPoint:
    cfg = family_merge(setup.config, setup.i, setup.lambda_tilde, t, setup.j)
    frame = _frame_at(cfg, setup.base)
    basis = build_symplectic_basis(cfg, setup.tree, frame, check=(t == 1.0))
    forms = adapted_forms(setup, cfg)
    std = DifferentialBasis.for_config(cfg).forms
    spokes, _ = spoke_integrals(frame, forms + std)
    n = len(forms)
    PA = np.array([cycle_periods(c, spokes[:, :n], forms, cfg) for c in basis.A])
    PB = np.array([cycle_periods(c, spokes[:, :n], forms, cfg) for c in basis.B])
    PBs = np.array([cycle_periods(c, spokes[:, n:], std, cfg) for c in basis.B])
    return FamilyPoint(t, PA, PB, PBs, basis.vertices)


def limit_periods(setup: MergeSetup):
    """Periods of the limit curve (tree with the cherry collapsed), same base point."""
    cfg = setup.limit
    frame = _frame_at(cfg, setup.base)
    basis = build_symplectic_basis(cfg, setup.limit_tree, frame)
    d = DifferentialBasis.for_config(cfg)
    forms = [Form(f.kind, f.power, setup.lambda_tilde if f.kind == setup.blow_kind else 0j) for f in d.forms]
    std = d.forms
    spokes, _ = spoke_integrals(frame, forms + std)
    n = len(forms)
    PA = np.array([cycle_periods(c, spokes[:, :n], forms, cfg) for c in basis.A])
    PB = np.array([cycle_periods(c, spokes[:, :n], forms, cfg) for c in basis.B])
    PBs = np.array([cycle_periods(c, spokes[:, n:], std, cfg) for c in basis.B])
    return PA, PB, PBs, basis.vertices


def beta_star() -> complex:
    return (OMEGA - 1) * beta(1 / 3, 1 / 3)


def merge_closed_form(setup: MergeSetup) -> complex:
    """B*(1/3,1/3)^3 prod_{k != i, j} (lambda_tilde - lambda_k)^(-b_k)."""
    out = beta_star() ** 3
    for k, (z, b) in enumerate(zip(setup.config.points, setup.config.co_indices)):
        if k not in (setup.i, setup.j):
            out *= (setup.lambda_tilde - z) ** (-b)
    return out


def laplace_sign(setup: MergeSetup, vertices: list[str], limit_vertices: list[str]) -> int:
    """Sign of expanding det P_B along row p and the blowing-up column, rows matched to the limit order."""
    cfg = setup.config
    d = DifferentialBasis.for_config(cfg)
    col = d.d1 if setup.white else 0
    row = vertices.index(setup.p)
    rest = [v for v in vertices if v != setup.p]
    perm = [rest.index(v) for v in limit_vertices]
    inv = sum(1 for a in range(len(perm)) for b in range(a + 1, len(perm)) if perm[a] > perm[b])
    return (-1) ** (row + col + inv)


# --------------------------------------------------------------------------
# reports
# --------------------------------------------------------------------------


@dataclass
class LimitItem:
    name: str
    ts: list[float]
    values: list[complex]
    extrapolated: complex
    extrapolation_error: float
    target: complex | None = None
    rel_error: float | None = None
    slope: float | None = None
    ok: bool | None = None

    def as_dict(self) -> dict:
        c = lambda z: None if z is None else [float(complex(z).real), float(complex(z).imag)]
        return {"name": self.name, "t": self.ts, "values": [c(v) for v in self.values],
                "extrapolated": c(self.extrapolated), "extrapolation_error": self.extrapolation_error,
                "target": c(self.target), "rel_error": self.rel_error, "slope": self.slope, "pass": self.ok}


def _item(name, ts, values, target=None, tol=1e-3, slope_target=None, slope_tol=0.02, zero_tol=None):
    hs = [t ** (1 / 3) for t in ts]
    ext, err = richardson(hs, values)
    item = LimitItem(name, list(ts), [complex(v) for v in values], ext, err)
    if target is not None:
        item.target = complex(target)
        item.rel_error = abs(ext / target - 1)
        item.ok = item.rel_error < tol
    if slope_target is not None:
        item.slope = loglog_slope(ts, values)
        item.ok = abs(item.slope - slope_target) < slope_tol
    if zero_tol is not None:
        item.ok = abs(ext) < zero_tol
    return item


@dataclass
class PeriodLimitReport:
    setup: MergeSetup = field(repr=False)
    items: list[LimitItem]

    @property
    def ok(self) -> bool:
        return all(it.ok is not False for it in self.items)

    def item(self, name: str) -> LimitItem:
        return next(it for it in self.items if it.name == name)

    def as_dict(self) -> dict:
        return {"white_pair": self.setup.white, "merge": [self.setup.i, self.setup.j],
                "lambda_tilde": [self.setup.lambda_tilde.real, self.setup.lambda_tilde.imag],
                "items": [it.as_dict() for it in self.items], "pass": self.ok}


def check_period_limits(config: BranchConfig, tree: MarkedBinaryTree, i: int, lambda_tilde=None,
                        t_sequence: Sequence[float] = DEFAULT_T, tol: float = 1e-3,
                        j: int | None = None) -> PeriodLimitReport:
    setup = merge_setup(config, tree, i, lambda_tilde, j, t_min=min(t_sequence), t_grid=t_sequence)
    pts = [family_point(setup, t) for t in t_sequence]
    ts = list(t_sequence)
    d = DifferentialBasis.for_config(config)
    p_row = pts[0].vertices.index(setup.p)
    blow_col = d.d1 if setup.white else 0
    vanish = [c for c in range(d.g) if c != blow_col]
    items = []
    # (1) B_p periods of every other adapted form vanish; the first decays like t^(1/3)
    for c in vanish:
        vals = [fp.P_B[p_row, c] for fp in pts]
        items.append(_item(f"vanish[{c}]", ts, vals, zero_tol=1e-3 * max(1.0, abs(vals[0]))))
    first = 0 if setup.white else d.d1
    vals = [fp.P_B[p_row, first] for fp in pts]
    items.append(_item("vanish_slope", ts, vals, slope_target=1 / 3))
    # (2) blowing-up period, cubed and rescaled
    gap = config.points[setup.first] - config.points[setup.second]
    vals = [t * gap * fp.P_B[p_row, blow_col] ** 3 for t, fp in zip(ts, pts)]
    target = merge_closed_form(setup) if setup.white else None
    items.append(_item("blowup_cube", ts, vals, target=target, tol=tol))
    # (3) other rows stay finite in the blowing-up column
    for r, v in enumerate(pts[0].vertices):
        if v == setup.p:
            continue
        vals = [fp.P_B[r, blow_col] for fp in pts]
        it = _item(f"finite[{v}]", ts, vals)
        it.ok = bool(np.isfinite(it.extrapolated) and abs(it.extrapolated) < 1e3 * max(abs(x) for x in vals))
        items.append(it)
    # (4) remaining rows and columns converge to the limit curve
    LA, LB, _, lverts = limit_periods(setup)
    limit_cols = [c for c in range(d.g) if c != blow_col]
    for r, v in enumerate(pts[0].vertices):
        if v == setup.p:
            continue
        lr = lverts.index(v)
        for lc, c in enumerate(limit_cols):
            vals = [fp.P_B[r, c] for fp in pts]
            items.append(_item(f"limit[{v},{c}]", ts, vals, target=LB[lr, lc], tol=tol))
    return PeriodLimitReport(setup, items)


@dataclass
class DetLimitReport:
    item: LimitItem
    sign: int
    unsigned_target: complex

    @property
    def ok(self) -> bool:
        return bool(self.item.ok)

    def as_dict(self) -> dict:
        return {**self.item.as_dict(), "ordering_sign": self.sign,
                "unsigned_target": [self.unsigned_target.real, self.unsigned_target.imag]}


def check_detPB_limit(config: BranchConfig, tree: MarkedBinaryTree, i: int, lambda_tilde=None,
                      t_sequence: Sequence[float] = DEFAULT_T, tol: float = 1e-3, j: int | None = None) -> DetLimitReport:
    """t (lambda_i - lambda_j) det P_B(t)^3 against the limit determinant times the merge constant."""
    setup = merge_setup(config, tree, i, lambda_tilde, j, t_min=min(t_sequence), t_grid=t_sequence)
    if not setup.white:
        raise DegenerationError("closed form is stated for a white pair only")
    ts = list(t_sequence)
    pts = [family_point(setup, t) for t in ts]
    gap = config.points[setup.first] - config.points[setup.second]
    vals = [t * gap * np.linalg.det(fp.P_B_std) ** 3 for t, fp in zip(ts, pts)]
    _, _, LBs, lverts = limit_periods(setup)
    unsigned = merge_closed_form(setup) * np.linalg.det(LBs) ** 3
    sign = laplace_sign(setup, pts[0].vertices, lverts)
    return DetLimitReport(_item("det_PB_cube", ts, vals, target=sign * unsigned, tol=tol), sign, complex(unsigned))


@dataclass
class FactorizationReport:
    lhs: LimitItem
    tau_pp: complex
    offdiag: list[float]
    first_factor: complex
    first_factor_target: complex
    first_factor_rel: float
    second_factor: complex
    product: complex
    rel_error: float
    char: Characteristic
    char_limit: Characteristic
    lambda_limit: tuple[int, ...]
    restriction_ok: bool
    tol: float

    @property
    def ok(self) -> bool:
        return self.rel_error < self.tol and self.first_factor_rel < self.tol and self.restriction_ok

    def as_dict(self) -> dict:
        c = lambda z: [float(complex(z).real), float(complex(z).imag)]
        return {"lhs": self.lhs.as_dict(), "tau_pp": c(self.tau_pp), "offdiag_abs": self.offdiag,
                "first_factor": c(self.first_factor), "first_factor_target": c(self.first_factor_target),
                "first_factor_rel": self.first_factor_rel, "second_factor": c(self.second_factor),
                "product": c(self.product), "rel_error": self.rel_error,
                "characteristic": self.char.as_strings(), "limit_characteristic": self.char_limit.as_strings(),
                "lambda_limit": list(self.lambda_limit), "restriction_ok": self.restriction_ok,
                "tol": self.tol, "pass": self.ok}


def theta_factorization_check(config: BranchConfig, tree: MarkedBinaryTree, i: int, lam: Sequence[int],
                              lambda_tilde=None, t_sequence: Sequence[float] = DEFAULT_T, tol: float = 1e-4,
                              j: int | None = None) -> FactorizationReport:
    setup = merge_setup(config, tree, i, lambda_tilde, j, t_min=min(t_sequence), t_grid=t_sequence)
    jj = setup.j
    if lam[i] == lam[jj]:
        raise TreeError("factorisation needs k_i != k_j", (lam[i], lam[jj]))
    if not is_equidistributed(config.indices, lam):
        raise TreeError("Lambda is not equi-distributed", tuple(lam))
    chi = characteristic_of(tree, lam, config.indices)
    ts = list(t_sequence)
    pts = [family_point(setup, t) for t in ts]
    taus = [np.linalg.solve(fp.P_B.T, fp.P_A.T).T for fp in pts]
    taus = [0.5 * (x + x.T) for x in taus]
    lhs_vals = [theta_constant(x, chi.alpha, chi.beta).value ** 6 for x in taus]
    lhs = _item("theta6", ts, lhs_vals)
    verts = pts[0].vertices
    pr = verts.index(setup.p)
    hs = [t ** (1 / 3) for t in ts]
    tau_pp, _ = richardson(hs, [x[pr, pr] for x in taus])
    offdiag = [float(max(abs(x[pr, c]) for c in range(len(verts)) if c != pr)) for x in taus]
    chi_p = Characteristic((chi.alpha[pr],), (chi.beta[pr],))
    f1 = theta_constant([[tau_pp]], chi_p.alpha, chi_p.beta).value ** 6
    cs = chowla_selberg_value()
    lam_lim = degenerate_class(lam, i, config.indices, jj)
    LA, LB, _, lverts = limit_periods(setup)
    tau2 = np.linalg.solve(LB.T, LA.T).T
    tau2 = 0.5 * (tau2 + tau2.T)
    chi2 = characteristic_of(setup.limit_tree, lam_lim, setup.limit.indices)
    f2 = theta_constant(tau2, chi2.alpha, chi2.beta).value ** 6
    prod = f1 * f2
    rel = abs(lhs.extrapolated / prod - 1)
    # the limit characteristic is the restriction of the full one to the surviving vertices
    restr = all(chi.alpha[verts.index(v)] == chi2.alpha[k] and chi.beta[verts.index(v)] == chi2.beta[k]
                for k, v in enumerate(lverts))
    return FactorizationReport(lhs, tau_pp, offdiag, f1, cs, abs(f1 / cs - 1), f2, prod, rel, chi, chi2,
                               tuple(lam_lim), restr, tol)


# --------------------------------------------------------------------------
# monodromy of a rotating cluster
# --------------------------------------------------------------------------


def twist_map(z: np.ndarray, angle: float, r1: float, r2: float) -> np.ndarray:
    """Rotate by ``angle`` inside radius r1, identity outside r2, linear twist in between."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    frac = np.clip((r2 - r) / (r2 - r1), 0.0, 1.0)
    return z * np.exp(1j * angle * frac)


def _densify(points: np.ndarray, step: float) -> np.ndarray:
    out = [points[0]]
    for p, q in zip(points[:-1], points[1:]):
        n = max(1, int(math.ceil(abs(q - p) / step)))
        s = np.arange(1, n + 1) / n
        out.extend(p + s * (q - p))
    return np.asarray(out)


@dataclass
class MonodromyReport:
    angle: float
    drift: float
    control_angle: float
    control_drift: float
    tol: float
    identity_drift: float
    matrices: dict = field(repr=False, default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.drift < self.tol and self.control_drift > 1e3 * self.tol and self.identity_drift < self.tol

    def as_dict(self) -> dict:
        return {"angle": self.angle, "drift": self.drift, "control_angle": self.control_angle,
                "control_drift": self.control_drift, "identity_drift": self.identity_drift,
                "tol": self.tol, "pass": self.ok}


def _cluster_radii(config: BranchConfig, subset) -> tuple[float, float]:
    inner = max(abs(config.points[k]) for k in subset)
    outer = min(abs(config.points[k]) for k in range(config.m) if k not in subset)
    if not inner < outer:
        raise DegenerationError("cluster is not separated from the other branch points by a circle about 0")
    return inner, outer


def transported_periods(config: BranchConfig, tree: MarkedBinaryTree, subset, angle: float,
                        frame: SpokeFrame | None = None, nodes: int = 24) -> tuple[np.ndarray, np.ndarray]:
    """Periods of the basis pushed along the rotation of the cluster by ``angle`` (a multiple of 2 pi)."""
    if abs(angle / (2 * math.pi) - round(angle / (2 * math.pi))) > 1e-12:
        raise ValueError("the family only closes up for multiples of 2 pi")
    frame = frame or choose_base_point(config, tree.leaf_cycle())
    basis = build_symplectic_basis(config, tree, frame)
    inner, outer = _cluster_radii(config, subset)
    gap = outer - inner
    rad = min(frame.radius, 0.1 * gap)
    r1, r2 = inner + 0.3 * gap, outer - 0.3 * gap
    if abs(frame.base) <= r2:
        raise DegenerationError("base point inside the twisted region")
    forms = DifferentialBasis.for_config(config).forms
    step = 0.25 * rad

    def periods_of(cycle: LiftedCycle) -> np.ndarray:
        total = np.zeros(len(forms), dtype=complex)
        for path in realise(cycle, frame, frame.base, rad, n_circle=64):
            pts = twist_map(_densify(path.points, step), angle, r1, r2)
            start = sheet_values(config, frame.base, path.start_sheet)
            val, _ = integrate_polyline(config, forms, pts, start, nodes)
            total += path.coef * val
        return total

    PA = np.array([periods_of(c) for c in basis.A])
    PB = np.array([periods_of(c) for c in basis.B])
    return PA, PB


def check_trivial_monodromy(config: BranchConfig, tree: MarkedBinaryTree, subset, tol: float = 1e-6,
                            loops: int = 3) -> MonodromyReport:
    """Periods after the cluster turns ``loops`` times (one loop of t^(1/3) when loops = 3) vs. once."""
    check_tree(tree, config)
    frame = choose_base_point(config, tree.leaf_cycle())
    P0 = transported_periods(config, tree, subset, 0.0, frame)
    P3 = transported_periods(config, tree, subset, 2 * math.pi * loops, frame)
    P1 = transported_periods(config, tree, subset, 2 * math.pi, frame)
    ref = np.concatenate(P0)
    scale = float(np.max(np.abs(ref)))
    drift = float(np.max(np.abs(np.concatenate(P3) - ref))) / scale
    control = float(np.max(np.abs(np.concatenate(P1) - ref))) / scale
    # the polyline periods at angle 0 must equal the spoke-formula periods
    from .periods import period_matrices

    pd = period_matrices(config, tree, frame=frame)
    ident = float(np.max(np.abs(np.concatenate([pd.P_A, pd.P_B]) - ref))) / scale
    return MonodromyReport(2 * math.pi * loops, drift, 2 * math.pi, control, tol, ident,
                           {"P0": P0, "P_loop": P3, "P_control": P1})


def scale_subset_for_edge(tree: MarkedBinaryTree, edge: tuple[str, str]) -> list[int]:
    """Terminals on the white-vertex side of an inner edge."""
    from .trees import _orient_edge

    p, q = _orient_edge(tree, edge)
    return sorted(tree.branch_of(x) for x in tree.component(q, p) if not tree.is_inner(x))
