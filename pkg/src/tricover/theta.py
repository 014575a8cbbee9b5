"""Theta constants with rational characteristics.

theta[alpha, beta](tau) = sum_n e( (n+alpha) tau (n+alpha)^T / 2 + (n+alpha) beta^T ),
e(x) = exp(2 pi i x), summed over the lattice points inside an ellipsoid whose
radius comes from a Gaussian tail bound.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import mpmath as mp
import numpy as np
from scipy.special import gammaincc, gamma as gamma_fn

from .trees import WHITE, MarkedBinaryTree, abar_basis_expand


class ThetaError(ArithmeticError):
    pass


MAX_POINTS = 2_000_000


# --------------------------------------------------------------------------
# characteristics
# --------------------------------------------------------------------------


def _frac(x) -> Fraction:
    return Fraction(x).limit_denominator(10**6) % 1


@dataclass(frozen=True)
class Characteristic:
    alpha: tuple[Fraction, ...]
    beta: tuple[Fraction, ...]

    def __post_init__(self):
        a = tuple(_frac(x) for x in self.alpha)
        b = tuple(_frac(x) for x in self.beta)
        if len(a) != len(b):
            raise ValueError("alpha and beta differ in length")
        object.__setattr__(self, "alpha", a)
        object.__setattr__(self, "beta", b)

    @property
    def g(self) -> int:
        return len(self.alpha)

    def __add__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(tuple(x + y for x, y in zip(self.alpha, other.alpha)),
                              tuple(x + y for x, y in zip(self.beta, other.beta)))

    def __sub__(self, other: "Characteristic") -> "Characteristic":
        return Characteristic(tuple(x - y for x, y in zip(self.alpha, other.alpha)),
                              tuple(x - y for x, y in zip(self.beta, other.beta)))

    def shifted(self, a: Sequence[int], b: Sequence[int]) -> tuple[list[Fraction], list[Fraction]]:
        """Unreduced (alpha + a, beta + b), for periodicity checks."""
        return [x + int(s) for x, s in zip(self.alpha, a)], [x + int(s) for x, s in zip(self.beta, b)]

    def as_strings(self) -> dict:
        return {"alpha": [str(x) for x in self.alpha], "beta": [str(x) for x in self.beta]}

    @classmethod
    def parse(cls, text: str) -> "Characteristic":
        """'a1,a2;b1,b2' with fractions such as 5/6."""
        try:
            left, right = text.split(";")
            a = [Fraction(s.strip()) for s in left.split(",") if s.strip()]
            b = [Fraction(s.strip()) for s in right.split(",") if s.strip()]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse characteristic {text!r}") from exc
        return cls(tuple(a), tuple(b))


def riemann_constant(tree_or_genus) -> Characteristic:
    """Every inner vertex contributes (A_v + B_v) / 2."""
    g = tree_or_genus if isinstance(tree_or_genus, int) else len(tree_or_genus.inner)
    half = Fraction(1, 2)
    return Characteristic((half,) * g, (half,) * g)


def characteristic_of(tree: MarkedBinaryTree, lam: Sequence[int], indices: Sequence[int] | None = None,
                      rotation: int = 1) -> Characteristic:
    """Lambda + riemann constant in (alpha, beta) coordinates of the tree's A/B basis."""
    coeffs = abar_basis_expand(tree, lam, indices, rotation)
    alpha, beta = [], []
    for v in tree.inner_order():
        s = 1 if tree.vertex(v).color == WHITE else -1
        c = coeffs[v]
        alpha.append(Fraction(s * c, 3) + Fraction(1, 2))
        beta.append(Fraction(-s * c, 3) + Fraction(1, 2))
    return Characteristic(tuple(alpha), tuple(beta))


# --------------------------------------------------------------------------
# lattice enumeration
# --------------------------------------------------------------------------


def _cholesky_upper(y: np.ndarray) -> np.ndarray:
    try:
        low = np.linalg.cholesky(0.5 * (y + y.T))
    except np.linalg.LinAlgError as exc:
        raise ThetaError("Im tau is not positive definite") from exc
    return low.T


def shortest_vector(t: np.ndarray) -> float:
    """Length of the shortest nonzero vector of the lattice t Z^g (small g, box search)."""
    g = t.shape[0]
    gram = t.T @ t
    best = math.sqrt(min(np.diag(gram)))
    bound = int(math.ceil(best / math.sqrt(np.linalg.eigvalsh(gram).min()))) if g else 0
    bound = min(bound, 6)
    for n in itertools.product(range(-bound, bound + 1), repeat=g):
        if any(n):
            v = np.asarray(n, dtype=float)
            best = min(best, math.sqrt(v @ gram @ v))
    return best


def tail_bound(radius: float, g: int, rho: float) -> float:
    """Bound on sum over points outside the ellipsoid of exp(-|x|^2), lattice minimum rho.

    This is the standard estimate (g/2) (2/rho)^g Gamma(g/2, (R - rho/2)^2) for
    theta series normalised as exp(-|T(n + alpha)|^2) with T^T T = pi Im tau.
    """
    if radius <= rho / 2:
        return math.inf
    x = (radius - rho / 2) ** 2
    return 0.5 * g * (2.0 / rho) ** g * float(gammaincc(g / 2, x) * gamma_fn(g / 2))


def radius_for(eps: float, g: int, rho: float) -> float:
    lo, hi = rho / 2 + 1e-9, rho / 2 + 1.0
    while tail_bound(hi, g, rho) > eps:
        hi = rho / 2 + 2 * (hi - rho / 2)
        if hi > 1e3:
            raise ThetaError("tail bound cannot reach requested eps")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if tail_bound(mid, g, rho) > eps:
            lo = mid
        else:
            hi = mid
    return hi


def ellipsoid_points(t: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """All integer n with |t (n + center)| <= radius, t upper triangular."""
    g = t.shape[0]
    out: list[list[int]] = []
    n = [0] * g

    def rec(i: int, budget: float, partial: np.ndarray):
        # partial[j] for j <= i accumulates sum_{k > i} t[j, k] (n_k + c_k)
        if i < 0:
            out.append(list(n))
            if len(out) > MAX_POINTS:
                raise ThetaError("lattice enumeration budget exceeded")
            return
        tii = t[i, i]
        mid = -center[i] - partial[i] / tii
        half = math.sqrt(max(budget, 0.0)) / tii
        for k in range(math.ceil(mid - half - 1e-12), math.floor(mid + half + 1e-12) + 1):
            val = tii * (k + center[i]) + partial[i]
            rest = budget - val * val
            if rest < -1e-12:
                continue
            n[i] = k
            rec(i - 1, rest, partial + t[:, i] * (k + center[i]))

    rec(g - 1, radius * radius, np.zeros(g))
    return np.asarray(out, dtype=float).reshape(-1, g)


# --------------------------------------------------------------------------
# theta constants
# --------------------------------------------------------------------------


@dataclass
class ThetaValue:
    value: complex
    bound: float
    points: int
    mp_value: object = None


def theta_constant(tau, alpha, beta, eps: float = 1e-14, dps: int | None = None) -> ThetaValue:
    """theta[alpha, beta](tau) at z = 0; ``dps`` switches to mpmath summation."""
    tau_np = np.array([[complex(tau[i, j]) for j in range(tau.cols)] for i in range(tau.rows)]) \
        if isinstance(tau, mp.matrix) else np.atleast_2d(np.asarray(tau, dtype=complex))
    g = tau_np.shape[0]
    alpha_f = np.array([float(x) for x in alpha])
    beta_f = np.array([float(x) for x in beta])
    t = _cholesky_upper(math.pi * tau_np.imag)
    rho = shortest_vector(t)
    radius = radius_for(eps, g, rho)
    pts = ellipsoid_points(t, alpha_f, radius)
    if dps is None:
        v = pts + alpha_f
        quad = np.einsum("ni,ij,nj->n", v, tau_np, v)
        phase = np.exp(1j * math.pi * quad + 2j * math.pi * (v @ beta_f))
        return ThetaValue(complex(np.sum(phase)), eps, len(pts))
    with mp.workdps(dps):
        tau_mp = tau if isinstance(tau, mp.matrix) else mp.matrix(tau_np.tolist())
        a = [mp.mpf(Fraction(x).numerator) / Fraction(x).denominator for x in alpha]
        b = [mp.mpf(Fraction(x).numerator) / Fraction(x).denominator for x in beta]
        total = mp.mpc(0)
        for n in pts:
            v = [mp.mpf(int(n[i])) + a[i] for i in range(g)]
            q = mp.fsum(v[i] * tau_mp[i, j] * v[j] for i in range(g) for j in range(g))
            lin = mp.fsum(v[i] * b[i] for i in range(g))
            total += mp.exp(mp.pi * 1j * q + 2 * mp.pi * 1j * lin)
        return ThetaValue(complex(total), eps, len(pts), total)


def theta_char(tau, chi: Characteristic, eps: float = 1e-14, dps: int | None = None) -> ThetaValue:
    return theta_constant(tau, chi.alpha, chi.beta, eps, dps)


def theta_sixth(tau, chi: Characteristic, eps: float = 1e-14, dps: int | None = None):
    tv = theta_char(tau, chi, eps, dps)
    return tv.mp_value ** 6 if tv.mp_value is not None else tv.value ** 6


@dataclass
class PeriodicityReport:
    base: complex
    shifted: list[tuple[tuple[int, ...], tuple[int, ...], complex, float]]
    max_deviation: float
    ok: bool


def sixth_power_periodicity_check(tau, chi: Characteristic, shifts=None, eps: float = 1e-14,
                                  rng: np.random.Generator | None = None) -> PeriodicityReport:
    g = chi.g
    if shifts is None:
        rng = rng or np.random.default_rng(0)
        shifts = [(tuple(rng.integers(-2, 3, g)), tuple(rng.integers(-2, 3, g))) for _ in range(3)]
    base = theta_constant(tau, chi.alpha, chi.beta, eps).value ** 6
    # |theta[a, b](tau)| <= theta[a, 0](i Im tau); below round-off of that a value counts as zero
    tau_np = np.atleast_2d(np.asarray(tau, dtype=complex))
    bound = theta_constant(1j * tau_np.imag, chi.alpha, [0] * g, eps).value.real
    floor = (1e-12 * bound) ** 6
    rows = []
    worst = 0.0
    for a, b in shifts:
        al, be = chi.shifted(a, b)
        val = theta_constant(tau, al, be, eps).value ** 6
        dev = abs(val - base) / max(abs(base), abs(val), floor)
        worst = max(worst, dev)
        rows.append((tuple(int(x) for x in a), tuple(int(x) for x in b), val, dev))
    return PeriodicityReport(base, rows, worst, worst < 1e-9)


def chowla_selberg_value() -> complex:
    """3^(9/4) (2 pi)^-6 Gamma(1/3)^9 exp(-5 pi i / 12)."""
    return 3 ** 2.25 * (2 * math.pi) ** -6 * math.gamma(1 / 3) ** 9 * complex(math.cos(-5 * math.pi / 12),
                                                                                 math.sin(-5 * math.pi / 12))
