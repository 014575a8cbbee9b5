"""Branch continuation, quadrature of holomorphic forms and period matrices.

Two cube roots are used: y1 with y1^3 = prod (x - lambda_i)^a_i and
y2 = prod (x - lambda_i) / y1, so y2^3 = prod (x - lambda_i)^b_i.  Along a
straight segment p -> x avoiding the branch points

    y1(x) = y1(p) * prod_i ((x - lambda_i) / (p - lambda_i))^(a_i / 3)

with principal powers is exact, because each ratio moves on a segment from 1
that never meets the negative real axis.  This closed form drives every
integral; the stepping continuation below is kept as an independent check.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import mpmath as mp
import numpy as np

from .cycles import LiftedCycle, SpokeFrame, SymplecticBasis, build_symplectic_basis, frame_for
from .quadrature import QuadratureError, gauss_legendre, integrate_unit, integrate_unit_mp
from .trees import BranchConfig, MarkedBinaryTree

OMEGA = cmath.exp(2j * math.pi / 3)
EXTENDED_DPS = 30


class PeriodError(ArithmeticError):
    """Numerical failure: singular P_B, Im tau not positive definite, quadrature trouble."""


@dataclass(frozen=True)
class Precision:
    name: str = "double"
    dps: int = 15

    @property
    def extended(self) -> bool:
        return self.name == "extended"


DOUBLE = Precision("double", 15)
EXTENDED = Precision("extended", EXTENDED_DPS)


def precision_from(name) -> Precision:
    if isinstance(name, Precision):
        return name
    if name in (None, "double"):
        return DOUBLE
    if name == "extended":
        return EXTENDED
    raise ValueError(f"unknown precision {name!r}")


# --------------------------------------------------------------------------
# differential forms
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Form:
    """(x - center)^power dx / y_kind with kind 1 or 2."""

    kind: int
    power: int
    center: complex = 0j

    def describe(self) -> str:
        c = "x" if self.center == 0 else f"(x - {self.center:g})"
        return f"{c}^{self.power} dx/y{self.kind}"


@dataclass(frozen=True)
class DifferentialBasis:
    d1: int
    d2: int

    @classmethod
    def for_config(cls, config: BranchConfig) -> "DifferentialBasis":
        d1 = sum(config.indices) // 3 - 1
        d2 = sum(config.co_indices) // 3 - 1
        assert d1 + d2 == config.genus
        return cls(d1, d2)

    @property
    def forms(self) -> list[Form]:
        return [Form(1, j) for j in range(self.d1)] + [Form(2, j) for j in range(self.d2)]

    @property
    def g(self) -> int:
        return self.d1 + self.d2


# --------------------------------------------------------------------------
# branch continuation
# --------------------------------------------------------------------------


def exponents(config: BranchConfig, kind: int) -> tuple[int, ...]:
    return config.indices if kind == 1 else config.co_indices


def reference_value(config: BranchConfig, x: complex, kind: int = 1) -> complex:
    """Principal product prod (x - lambda_i)^(e_i / 3); the label-0 sheet at x."""
    e = exponents(config, kind)
    return cmath.exp(sum(ei / 3 * cmath.log(x - lam) for ei, lam in zip(e, config.points)))


def continue_segment(config: BranchConfig, kind: int, p: complex, yp: complex, xs) -> np.ndarray:
    """Exact continuation of y_kind from (p, yp) to points xs on a straight segment from p."""
    xs = np.asarray(xs, dtype=complex)
    e = exponents(config, kind)
    logsum = np.zeros_like(xs)
    for ei, lam in zip(e, config.points):
        logsum += ei / 3 * np.log((xs - lam) / (p - lam))
    return yp * np.exp(logsum)


class ContinuationError(ArithmeticError):
    pass


def branch_continue(config: BranchConfig, kind: int, polyline, start_value: complex,
                    max_steps: int = 200000) -> np.ndarray:
    """Nearest-root stepping along a polyline; returns y at every waypoint.

    A step of length h from x changes arg(x - lambda_i) by at most
    asin(h / |x - lambda_i|); steps are shortened until the weighted sum of these
    bounds is below pi / 3, so the cube root moves by less than pi / 9 and the
    nearest of the three roots is the continuation.
    """
    pts = [complex(z) for z in polyline]
    e = exponents(config, kind)
    lam = np.asarray(config.points)

    def radicand(x):
        return complex(np.prod((x - lam) ** np.asarray(e)))

    y = complex(start_value)
    out = [y]
    steps = 0
    for p, q in zip(pts[:-1], pts[1:]):
        x = p
        f = radicand(x)
        remaining = 1.0
        h = 1.0
        while remaining > 0:
            h = min(h * 2, remaining)
            while True:
                xn = x + h / remaining * (q - x) if remaining > 0 else q
                fn = radicand(xn)
                if fn == 0:
                    raise ContinuationError("path runs into a branch point")
                step = abs(xn - x)
                dist = np.abs(x - lam)
                wind = float(np.sum(np.asarray(e) * np.arcsin(np.minimum(1.0, step / dist))))
                if wind < math.pi / 3 and abs(abs(fn) / abs(f) - 1) < 0.5:
                    break
                h *= 0.5
                if h < 1e-14:
                    raise ContinuationError("step underflow near a branch point")
            roots = [abs(fn) ** (1 / 3) * cmath.exp(1j * (cmath.phase(fn) + 2 * math.pi * r) / 3) for r in range(3)]
            y = min(roots, key=lambda r: abs(r - y))
            x, f = xn, fn
            remaining -= h
            steps += 1
            if steps > max_steps:
                raise ContinuationError("step budget exhausted")
        out.append(y)
    return np.asarray(out)


# --------------------------------------------------------------------------
# spoke integrals
# --------------------------------------------------------------------------


def _breakpoints(frame: SpokeFrame, k: int) -> list[float]:
    b = frame.base
    lam = frame.config.points
    d = lam[k] - b
    out = []
    for j, z in enumerate(lam):
        if j == k:
            continue
        s = ((z - b) * np.conj(d)).real / abs(d) ** 2
        if 0 < s < 1:
            out.append(float(s))
    return out


def spoke_integrals(frame: SpokeFrame, forms, precision: Precision = DOUBLE):
    """J[k][f] = integral over the spoke b -> lambda_k of the form f on the label-0 sheet.

    Returns (values, error) as numpy arrays (double) or mpmath matrices (extended).
    """
    config = frame.config
    m = config.m
    if precision.extended:
        return _spoke_integrals_mp(frame, forms, precision.dps)
    b = frame.base
    lam = np.asarray(config.points)
    y_ref = {1: reference_value(config, b, 1)}
    y_ref[2] = complex(np.prod(b - lam)) / y_ref[1]
    out = np.zeros((m, len(forms)), dtype=complex)
    err = np.zeros((m, len(forms)))
    for k in range(m):
        d = lam[k] - b

        def integrand(t, u, k=k, d=d):
            x = b + t * d
            logs = []
            for j in range(m):
                if j == k:
                    logs.append(np.log(u + 0j))
                else:
                    logs.append(np.log((x - lam[j]) / (b - lam[j])))
            cols = []
            for f in forms:
                e = exponents(config, f.kind)
                s = sum(-e[j] / 3 * logs[j] for j in range(m))
                cols.append((x - f.center) ** f.power * d * np.exp(s) / y_ref[f.kind])
            return np.stack(cols, axis=-1)

        try:
            res = integrate_unit(integrand, _breakpoints(frame, k))
        except QuadratureError as exc:
            raise PeriodError(f"spoke integral to branch point {k}: {exc}") from exc
        out[k] = res.value
        err[k] = res.error
    return out, err


def _spoke_integrals_mp(frame: SpokeFrame, forms, dps: int):
    config = frame.config
    m = config.m
    with mp.workdps(dps + 5):
        b = mp.mpc(frame.base)
        lam = [mp.mpc(z) for z in config.points]
        y1 = mp.exp(sum(mp.mpf(a) / 3 * mp.log(b - z) for a, z in zip(config.indices, lam)))
        y_ref = {1: y1, 2: mp.fprod([b - z for z in lam]) / y1}
        out = [[None] * len(forms) for _ in range(m)]
        err = np.zeros((m, len(forms)))
        for k in range(m):
            d = lam[k] - b
            for fi, f in enumerate(forms):
                e = exponents(config, f.kind)
                c = mp.mpc(f.center)

                def integrand(t, u, k=k, d=d, e=e, c=c, f=f):
                    x = b + t * d
                    s = -mp.mpf(e[k]) / 3 * mp.log(u)
                    for j in range(m):
                        if j != k:
                            s -= mp.mpf(e[j]) / 3 * mp.log((x - lam[j]) / (b - lam[j]))
                    return (x - c) ** f.power * d * mp.exp(s) / y_ref[f.kind]

                val, e_ = integrate_unit_mp(integrand, _breakpoints(frame, k), dps=dps + 5)
                out[k][fi] = val
                err[k, fi] = float(e_)
        return out, err


# --------------------------------------------------------------------------
# periods of cycles
# --------------------------------------------------------------------------


def loop_factor(kind: int, a: int, s: int, lib=cmath):
    """Period of gamma_k^(s) divided by the spoke integral J_k for a y_kind form."""
    if lib is cmath:
        w = OMEGA
    else:
        w = mp.exp(2j * mp.pi / 3)
    if kind == 1:
        return w ** (-s) * (1 - w ** (-a))
    return w ** s * (1 - w ** a)


def cycle_periods(cycle: LiftedCycle, spokes, forms, config: BranchConfig, extended: bool = False):
    """Periods of ``cycle`` against each form, from the spoke integrals."""
    if extended:
        row = [mp.mpc(0)] * len(forms)
        for (k, s), n in cycle.terms:
            for fi, f in enumerate(forms):
                row[fi] += n * loop_factor(f.kind, config.indices[k], s, mp) * spokes[k][fi]
        return row
    row = np.zeros(len(forms), dtype=complex)
    for (k, s), n in cycle.terms:
        for fi, f in enumerate(forms):
            row[fi] += n * loop_factor(f.kind, config.indices[k], s) * spokes[k, fi]
    return row


@dataclass
class PeriodData:
    P_A: np.ndarray
    P_B: np.ndarray
    tau: np.ndarray
    cond_B: float
    quad_error: float
    symmetry_residual: float
    vertices: list[str]
    forms: list[Form]
    basis: SymplecticBasis | None = field(default=None, repr=False)
    precision: Precision = DOUBLE
    mp_P_A: object = field(default=None, repr=False)
    mp_P_B: object = field(default=None, repr=False)
    mp_tau: object = field(default=None, repr=False)

    @property
    def g(self) -> int:
        return self.P_A.shape[0]

    def det_B(self):
        if self.mp_P_B is not None:
            return mp.det(self.mp_P_B)
        return complex(np.linalg.det(self.P_B))


def _to_numpy(mat) -> np.ndarray:
    return np.array([[complex(mat[i, j]) for j in range(mat.cols)] for i in range(mat.rows)])


def check_tau(tau: np.ndarray, tol: float) -> float:
    resid = float(np.max(np.abs(tau - tau.T))) if tau.size else 0.0
    if resid > tol:
        raise PeriodError(f"tau is not symmetric (residual {resid:.2e})")
    im = 0.5 * (tau.imag + tau.imag.T)
    try:
        np.linalg.cholesky(im)
    except np.linalg.LinAlgError as exc:
        raise PeriodError("Im tau is not positive definite") from exc
    return resid


def period_matrices(config: BranchConfig, tree: MarkedBinaryTree, precision="double",
                    frame: SpokeFrame | None = None, rotation: int = 1, basis: SymplecticBasis | None = None,
                    check_basis: bool = True, sym_tol: float | None = None) -> PeriodData:
    """P_A, P_B (rows: inner vertices in planar DFS order, columns: eta_1..eta_g) and tau."""
    prec = precision_from(precision)
    if basis is None:
        frame = frame or frame_for(config, tree)
        basis = build_symplectic_basis(config, tree, frame, rotation=rotation, check=check_basis)
    frame = basis.frame
    forms = DifferentialBasis.for_config(config).forms
    spokes, err = spoke_integrals(frame, forms, prec)
    quad_error = float(np.max(err)) if err.size else 0.0
    if prec.extended:
        with mp.workdps(prec.dps):
            PA = mp.matrix([cycle_periods(c, spokes, forms, config, True) for c in basis.A])
            PB = mp.matrix([cycle_periods(c, spokes, forms, config, True) for c in basis.B])
            try:
                tau_mp = PA * mp.inverse(PB)
            except ZeroDivisionError as exc:
                raise PeriodError("P_B is singular") from exc
            tau_mp = (tau_mp + tau_mp.T) / 2
        P_A, P_B = _to_numpy(PA), _to_numpy(PB)
    else:
        P_A = np.array([cycle_periods(c, spokes, forms, config) for c in basis.A])
        P_B = np.array([cycle_periods(c, spokes, forms, config) for c in basis.B])
        PA = PB = tau_mp = None
    cond = float(np.linalg.cond(P_B))
    if not np.isfinite(cond) or cond > 1e13:
        raise PeriodError(f"P_B is numerically singular (condition {cond:.2e})")
    tau_raw = np.linalg.solve(P_B.T, P_A.T).T
    tol = sym_tol if sym_tol is not None else max(1e-8, 1e4 * quad_error) * max(1.0, float(np.max(np.abs(tau_raw))))
    resid = check_tau(tau_raw, tol)
    tau = _to_numpy(tau_mp) if tau_mp is not None else 0.5 * (tau_raw + tau_raw.T)
    return PeriodData(P_A, P_B, tau, cond, quad_error, resid, basis.vertices, forms, basis, prec, PA, PB, tau_mp)


# --------------------------------------------------------------------------
# integration along general polylines (used for transported cycles)
# --------------------------------------------------------------------------


def integrate_polyline(config: BranchConfig, forms, points, start_values: dict[int, complex],
                       nodes: int = 24) -> tuple[np.ndarray, dict[int, complex]]:
    """Integrate forms along a polyline avoiding branch points, continuing y exactly segment by segment.

    Returns the integrals and the end values of y1, y2.
    """
    pts = np.asarray(points, dtype=complex)
    s, w = gauss_legendre(nodes)
    y = dict(start_values)
    total = np.zeros(len(forms), dtype=complex)
    for p, q in zip(pts[:-1], pts[1:]):
        xs = p + s * (q - p)
        vals = {kind: continue_segment(config, kind, p, y[kind], xs) for kind in (1, 2)}
        for fi, f in enumerate(forms):
            total[fi] += (q - p) * np.sum(w * (xs - f.center) ** f.power / vals[f.kind])
        for kind in (1, 2):
            y[kind] = complex(continue_segment(config, kind, p, y[kind], [q])[0])
    return total, y


def sheet_values(config: BranchConfig, base: complex, sheet: int) -> dict[int, complex]:
    """y1, y2 at the base point on a given sheet label."""
    y1 = OMEGA ** sheet * reference_value(config, base, 1)
    y2 = complex(np.prod(base - np.asarray(config.points))) / y1
    return {1: y1, 2: y2}
