"""Double-exponential (tanh-sinh) quadrature on [0, 1].

Integrands are called as ``f(t, u)`` with ``u = 1 - t`` supplied separately, so
algebraic singularities at t = 1 can be evaluated without cancellation.
Intervals whose error estimate stays above target are bisected.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath as mp
import numpy as np

MAX_LEVEL = 12
TARGET = 1e-12


@lru_cache(maxsize=None)
def _ts_level(level: int, tmax: float = 6.5):
    """Abscissae on [0, 1] as (t, 1 - t, weight) for step h = 2^-level.

    Each level contains only the new (odd) nodes so sums can be refined.
    """
    h = 2.0 ** -level
    if level == 0:
        k = np.arange(-int(tmax / h), int(tmax / h) + 1)
    else:
        k = np.arange(-int(tmax / h) | 1, int(tmax / h) + 1, 2)
    s = k * h
    arg = 0.5 * math.pi * np.sinh(s)
    # x in (-1, 1); 1 - x and 1 + x via exp to keep relative accuracy near the ends
    e = np.exp(-2.0 * np.abs(arg))
    one_minus_abs = 2.0 * e / (1.0 + e)
    # cosh(s) / cosh(arg)^2 written without overflow
    w = 0.5 * math.pi * np.cosh(s) * 4.0 * e / (1.0 + e) ** 2
    pos = s >= 0
    t = np.where(pos, 1.0 - 0.5 * one_minus_abs, 0.5 * one_minus_abs)
    u = np.where(pos, 0.5 * one_minus_abs, 1.0 - 0.5 * one_minus_abs)
    w = 0.5 * w
    keep = (t > 0) & (u > 0) & (w > 1e-300)
    return t[keep], u[keep], w[keep]


@dataclass
class QuadResult:
    value: complex
    error: float
    evaluations: int


def tanh_sinh(f, lo: float = 0.0, hi: float = 1.0, tol: float = TARGET, max_level: int = MAX_LEVEL) -> QuadResult:
    """Integrate f over [lo, hi] (subinterval of [0, 1]) by tanh-sinh level doubling."""
    width = hi - lo
    total = 0.0
    prev = None
    h = 1.0
    evals = 0
    err = math.inf
    for level in range(max_level + 1):
        tt, uu, ww = _ts_level(level)
        t = lo + width * tt
        u = (1.0 - hi) + width * uu
        vals = f(t, u)
        evals += len(t)
        total = total + np.tensordot(ww, vals, axes=(0, 0))
        h = 2.0 ** -level
        est = width * h * total
        if prev is not None:
            err = float(np.max(np.abs(est - prev)))
            if level >= 3 and err <= tol * max(1.0, _size(est)):
                # the change between levels overestimates the error of the finer one
                return QuadResult(est, err, evals)
        prev = est
    return QuadResult(prev, err, evals)


def _size(v) -> float:
    return float(np.max(np.abs(v)))


def adaptive(f, lo: float = 0.0, hi: float = 1.0, tol: float = TARGET, depth: int = 40,
             level: int = 8) -> QuadResult:
    """Bisect [lo, hi] until each piece converges with a modest level cap."""
    res = tanh_sinh(f, lo, hi, tol=tol, max_level=level)
    if res.error <= tol * max(1.0, _size(res.value)) or depth == 0:
        if depth == 0 and res.error > tol * max(1.0, _size(res.value)):
            res = tanh_sinh(f, lo, hi, tol=tol, max_level=MAX_LEVEL)
        return res
    mid = 0.5 * (lo + hi)
    left = adaptive(f, lo, mid, tol, depth - 1, level)
    right = adaptive(f, mid, hi, tol, depth - 1, level)
    return QuadResult(left.value + right.value, left.error + right.error, res.evaluations + left.evaluations + right.evaluations)


class QuadratureError(ArithmeticError):
    pass


def integrate_unit(f, breakpoints=(), tol: float = TARGET) -> QuadResult:
    """Integrate f(t, u) over [0, 1], splitting at the given interior breakpoints first."""
    pts = [0.0] + sorted(p for p in breakpoints if 0.0 < p < 1.0) + [1.0]
    value = 0j
    error = 0.0
    evals = 0
    for lo, hi in zip(pts[:-1], pts[1:]):
        if hi - lo < 1e-15:
            continue
        r = adaptive(f, lo, hi, tol)
        value += r.value
        error += r.error
        evals += r.evaluations
    if not np.all(np.isfinite(value)) or error > 1e3 * tol * max(1.0, _size(value)):
        raise QuadratureError(f"quadrature did not converge (error estimate {error:.3e})")
    return QuadResult(value, error, evals)


def integrate_unit_mp(f, breakpoints=(), dps: int = 30):
    """Extended-precision counterpart: mpmath tanh-sinh on [0, 1] with f(t, u)."""
    with mp.workdps(dps):
        pts = [mp.mpf(0)] + [mp.mpf(p) for p in sorted(breakpoints) if 0 < p < 1] + [mp.mpf(1)]
        total = mp.mpc(0)
        err = mp.mpf(0)
        for lo, hi in zip(pts[:-1], pts[1:]):
            mid = (lo + hi) / 2
            # halves measured from their outer end; v = w^3 removes x^(-1/3), x^(-2/3) endpoint terms
            left = lambda w, lo=lo: 3 * w * w * f(lo + w ** 3, 1 - lo - w ** 3)
            right = lambda w, hi=hi: 3 * w * w * f(hi - w ** 3, (1 - hi) + w ** 3)
            for g in (left, right):
                val, e = mp.quad(g, [0, mp.cbrt(mid - lo)], error=True, method="tanh-sinh", maxdegree=10)
                total += val
                err += e
        return total, err


@lru_cache(maxsize=None)
def gauss_legendre(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def beta(p: float, q: float) -> float:
    return math.exp(math.lgamma(p) + math.lgamma(q) - math.lgamma(p + q))
