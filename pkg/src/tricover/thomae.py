"""Difference products, the constant kappa and end-to-end Thomae checks."""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass, field
from typing import Sequence

import mpmath as mp
import numpy as np

from .periods import PeriodData, PeriodError, period_matrices, precision_from
from .theta import Characteristic, ThetaError, characteristic_of, theta_char
from .trees import BranchConfig, MarkedBinaryTree, TreeError, check_tree, distribution_counts, is_equidistributed


class VerificationError(RuntimeError):
    def __init__(self, stage: str, message: str):
        super().__init__(f"[{stage}] {message}")
        self.stage = stage


# --------------------------------------------------------------------------
# difference products
# --------------------------------------------------------------------------


def pair_product(s1: Sequence[int], s2: Sequence[int], points, lib=None):
    """prod_{a in s1, b in s2} (lambda_a - lambda_b); for s1 == s2 only ascending pairs a < b."""
    s1, s2 = list(s1), list(s2)
    one = 1 if lib is None else lib.mpc(1)
    pts = points
    if sorted(s1) == sorted(s2):
        out = one
        idx = sorted(s1)
        for x, a in enumerate(idx):
            for b in idx[x + 1:]:
                out *= pts[a] - pts[b]
        return out
    if set(s1) & set(s2):
        raise ValueError("difference product of overlapping distinct sets")
    out = one
    for a in s1:
        for b in s2:
            out *= pts[a] - pts[b]
    return out


def label_sets(indices: Sequence[int], lam: Sequence[int]) -> tuple[list[list[int]], list[list[int]]]:
    """White and black terminals grouped by label 0, 1, 2."""
    white = [[], [], []]
    black = [[], [], []]
    for i, (a, k) in enumerate(zip(indices, lam)):
        (white if a == 1 else black)[int(k) % 3].append(i)
    return white, black


def delta_product(config: BranchConfig, lam: Sequence[int], extended: bool = False):
    """Difference product of an equi-distributed class (ordered pairs in the mixed factor)."""
    if not is_equidistributed(config.indices, lam):
        raise ValueError(f"Lambda is not equi-distributed: {distribution_counts(config.indices, lam)}")
    lib = mp if extended else None
    pts = [mp.mpc(z) for z in config.points] if extended else list(config.points)
    white, black = label_sets(config.indices, lam)
    out = mp.mpc(1) if extended else 1 + 0j
    for i in range(3):
        out *= pair_product(white[i], white[i], pts, lib) ** 3 * pair_product(black[i], black[i], pts, lib) ** 3
    for i in range(3):
        for j in range(i + 1, 3):
            out *= pair_product(white[i], white[j], pts, lib) * pair_product(black[i], black[j], pts, lib)
    for i in range(3):
        for j in range(3):
            if i != j:
                out *= pair_product(white[i], black[j], pts, lib) ** 2
    return out


def delta_degree(config: BranchConfig, lam: Sequence[int]) -> int:
    """Number of linear factors in the difference product (its homogeneity degree)."""
    white, black = label_sets(config.indices, lam)
    n = [len(x) for x in white]
    nb = [len(x) for x in black]
    deg = sum(3 * (n[i] * (n[i] - 1) // 2 + nb[i] * (nb[i] - 1) // 2) for i in range(3))
    deg += sum(n[i] * n[j] + nb[i] * nb[j] for i in range(3) for j in range(i + 1, 3))
    deg += sum(2 * n[i] * nb[j] for i in range(3) for j in range(3) if i != j)
    return deg


def kappa(g: int = 1, extended: bool = False):
    """((2 pi)^3 3^(3/4) e^(11 pi i / 12))^-g."""
    if extended:
        k = 1 / ((2 * mp.pi) ** 3 * mp.mpf(3) ** (mp.mpf(3) / 4) * mp.exp(11j * mp.pi / 12))
        return k ** g
    k = 1 / ((2 * math.pi) ** 3 * 3 ** 0.75 * cmath.exp(11j * math.pi / 12))
    return k ** g


# --------------------------------------------------------------------------
# verification
# --------------------------------------------------------------------------


@dataclass
class VerificationReport:
    lhs: complex
    rhs_base: complex
    ratio: complex
    kappa_g: complex
    modulus_dev: float
    phase_test: float
    twelfth_root_test: float
    tol_modulus: float
    tol_phase: float
    characteristic: Characteristic
    delta: complex
    det_B: complex
    periods: PeriodData = field(repr=False)
    seconds: float = 0.0

    @property
    def modulus_ok(self) -> bool:
        return self.modulus_dev < self.tol_modulus

    @property
    def phase_ok(self) -> bool:
        return self.phase_test < self.tol_phase

    @property
    def ok(self) -> bool:
        return self.modulus_ok and self.phase_ok

    def as_dict(self) -> dict:
        c = lambda z: [float(complex(z).real), float(complex(z).imag)]
        return {
            "lhs": c(self.lhs), "rhs_base": c(self.rhs_base), "ratio": c(self.ratio),
            "kappa_g": c(self.kappa_g), "modulus_dev": self.modulus_dev, "phase_test": self.phase_test,
            "twelfth_root_test": self.twelfth_root_test,
            "tolerances": {"modulus": self.tol_modulus, "phase": self.tol_phase},
            "pass": {"modulus": self.modulus_ok, "phase": self.phase_ok, "all": self.ok},
            "characteristic": self.characteristic.as_strings(), "delta": c(self.delta), "det_B": c(self.det_B),
            "seconds": self.seconds,
        }


def verify_thomae(config: BranchConfig, tree: MarkedBinaryTree, lam: Sequence[int], precision="double",
                  tol_modulus: float = 1e-6, tol_phase: float = 1e-5, eps: float = 1e-14,
                  periods: PeriodData | None = None, rotation: int = 1) -> VerificationReport:
    """theta[Lambda + rho]^6 against Delta * det(P_B)^3 * kappa^g."""
    start = time.perf_counter()
    prec = precision_from(precision)
    try:
        check_tree(tree, config)
        if not is_equidistributed(config.indices, lam):
            raise TreeError("Lambda is not equi-distributed", tuple(lam))
        chi = characteristic_of(tree, lam, config.indices, rotation)
    except TreeError as exc:
        raise VerificationError("tree", str(exc)) from exc
    try:
        pdata = periods or period_matrices(config, tree, prec, rotation=rotation)
    except PeriodError as exc:
        raise VerificationError("periods", str(exc)) from exc
    g = pdata.g
    try:
        if prec.extended:
            with mp.workdps(prec.dps):
                tv = theta_char(pdata.mp_tau, chi, eps=10.0 ** (-prec.dps), dps=prec.dps)
                lhs = tv.mp_value ** 6
                det_b = mp.det(pdata.mp_P_B)
                delta = delta_product(config, lam, extended=True)
                rhs = delta * det_b ** 3
                r = lhs / rhs
                k = kappa(g, extended=True)
                mod_dev = float(abs(abs(r) / abs(k) - 1))
                phase = float(abs(r ** 6 / k ** 6 - 1))
                twelfth = float(min(abs(r / k - cmath.exp(1j * math.pi * q / 6)) for q in range(12)))
                lhs, rhs, r, k, det_b, delta = (complex(x) for x in (lhs, rhs, r, k, det_b, delta))
        else:
            tv = theta_char(pdata.tau, chi, eps=eps)
            lhs = tv.value ** 6
            det_b = complex(np.linalg.det(pdata.P_B))
            delta = delta_product(config, lam)
            rhs = delta * det_b ** 3
            r = lhs / rhs
            k = kappa(g)
            mod_dev = abs(abs(r) / abs(k) - 1)
            phase = abs((r / k) ** 6 - 1)
            twelfth = min(abs(r / k - cmath.exp(1j * math.pi * q / 6)) for q in range(12))
    except ThetaError as exc:
        raise VerificationError("theta", str(exc)) from exc
    return VerificationReport(lhs, rhs, r, k, mod_dev, phase, twelfth, tol_modulus, tol_phase, chi, delta, det_b,
                              pdata, time.perf_counter() - start)


# --------------------------------------------------------------------------
# the genus-2 worked example and its closed-form right-hand side
# --------------------------------------------------------------------------


EXAMPLE7 = {
    "lambda": [[0, 0], [1, 0], [2, 0], [3, 0]],
    "a": [2, 2, 1, 1],
    "tree": {
        "inner": [
            {"id": "p", "color": "white", "adj": ["t1", "t2", "q"], "mark": "q"},
            {"id": "q", "color": "black", "adj": ["t3", "t4", "p"], "mark": "p"},
        ],
        "leaves": [{"id": "t1", "branch": 0}, {"id": "t2", "branch": 1},
                   {"id": "t3", "branch": 2}, {"id": "t4", "branch": 3}],
    },
    "Lambda": [2, 1, 1, 2],
}


def example7_rhs(config: BranchConfig, det_b, extended: bool = False):
    """Closed-form right side (3 sqrt3 (2 pi)^6)^-1 e^(pi i/6) det(B)^3 (l2-l1)(l4-l3)(l3-l1)^2(l4-l2)^2."""
    lib = mp if extended else cmath
    l1, l2, l3, l4 = ([mp.mpc(z) for z in config.points] if extended else config.points)
    pi = mp.pi if extended else math.pi
    sqrt3 = mp.sqrt(3) if extended else math.sqrt(3)
    const = lib.exp(1j * pi / 6) / (3 * sqrt3 * (2 * pi) ** 6)
    return const * det_b ** 3 * (l2 - l1) * (l4 - l3) * (l3 - l1) ** 2 * (l4 - l2) ** 2


@dataclass
class Example7Report:
    lhs: complex
    rhs: complex
    rel_error: float
    characteristic: Characteristic
    tol: float
    seconds: float
    precision: str
    verification: VerificationReport = field(repr=False)

    @property
    def ok(self) -> bool:
        return self.rel_error < self.tol

    def as_dict(self) -> dict:
        c = lambda z: [float(complex(z).real), float(complex(z).imag)]
        return {"lhs": c(self.lhs), "rhs": c(self.rhs), "rel_error": self.rel_error,
                "characteristic": self.characteristic.as_strings(), "tol": self.tol, "pass": self.ok,
                "seconds": self.seconds, "precision": self.precision,
                "verification": self.verification.as_dict()}


def run_example7(precision="extended") -> Example7Report:
    from .io import parse_config

    start = time.perf_counter()
    prec = precision_from(precision)
    config, tree, lam = parse_config(EXAMPLE7)
    rep = verify_thomae(config, tree, lam, prec)
    if prec.extended:
        with mp.workdps(prec.dps):
            pd = rep.periods
            chi = rep.characteristic
            lhs = theta_char(pd.mp_tau, chi, eps=10.0 ** (-prec.dps), dps=prec.dps).mp_value ** 6
            rhs = example7_rhs(config, mp.det(pd.mp_P_B), extended=True)
            rel = float(abs(lhs / rhs - 1))
            lhs, rhs = complex(lhs), complex(rhs)
        tol = 1e-8
    else:
        lhs = rep.lhs
        rhs = example7_rhs(config, rep.det_B)
        rel = abs(lhs / rhs - 1)
        tol = 1e-6
    return Example7Report(lhs, rhs, rel, rep.characteristic, tol, time.perf_counter() - start, prec.name, rep)
