"""Reference examples, each as a named check returning a pass flag and a detail."""
from __future__ import annotations

import cmath
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .cycles import build_symplectic_basis, choose_base_point, class_in_H, intersection_matrix, loop_polyline, \
    standard_form
from .io import parse_config
from .periods import OMEGA, DifferentialBasis, integrate_polyline, period_matrices, sheet_values
from .theta import Characteristic, characteristic_of, chowla_selberg_value, riemann_constant, theta_constant
from .thomae import EXAMPLE7, delta_product, kappa, run_example7
from .trees import (BranchConfig, F3Class, abar_basis_expand, blocks_at, class_abar, decompose, h_subspace,
                    is_equidistributed, make_tree, merged_indices, validate_tree)

SIMPLEST = {
    "lambda": [[0, 0], [1, 0], [0, 1]],
    "a": [1, 1, 1],
    "tree": {"inner": [{"id": "v", "color": "black", "adj": ["t1", "t2", "t3"], "mark": "t3"}],
             "leaves": [{"id": "t1", "branch": 0}, {"id": "t2", "branch": 1}, {"id": "t3", "branch": 2}]},
}


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str
    seconds: float

    def as_dict(self) -> dict:
        return {"name": self.name, "pass": self.ok, "detail": self.detail, "seconds": self.seconds}


def _example():
    return parse_config(EXAMPLE7)


def check_example_tree():
    cfg, tree, _ = _example()
    rep = validate_tree(tree, cfg)
    return rep.ok and rep.genus == 2, f"valid={rep.ok} genus={rep.genus}"


def check_simplest_tree():
    cfg, tree, _ = parse_config(SIMPLEST)
    rep = validate_tree(tree, cfg)
    b = blocks_at(tree, "v")
    cls = class_abar(tree, "v")
    ok = rep.ok and rep.genus == 1 and b == ([0], [1], [2]) and cls == F3Class((-1, 1, 0))
    return ok, f"genus={rep.genus} blocks={b} class={cls.coeffs}"


def check_example_classes():
    cfg, tree, lam = _example()
    a1, a2 = class_abar(tree, "p"), class_abar(tree, "q")
    c = abar_basis_expand(tree, lam, cfg.indices)
    ok = a1 == F3Class((-1, 1, 0, 0)) and a2 == F3Class((0, 0, -1, 1)) \
        and (c["p"] % 3, c["q"] % 3) == (1, 2) and (a1 - a2) == F3Class(lam)
    return ok, f"A_p={a1.coeffs} A_q={a2.coeffs} expansion={c}"


def check_equidistribution():
    ok1 = is_equidistributed((2, 2, 1, 1), (2, 1, 1, 2))
    ok2 = is_equidistributed((1,) * 6, (0, 0, 1, 1, 2, 2))
    return ok1 and ok2, f"example={ok1} all-white={ok2}"


def check_direct_sum():
    cfg, tree, _ = _example()
    hp = h_subspace(tree, cfg.indices, ("p", "q"), "p")
    hq = h_subspace(tree, cfg.indices, ("p", "q"), "q")
    tp, tq = decompose(tree, cfg.indices, ("p", "q"))
    dim = lambda s: round(math.log(len(s), 3))
    ok = dim(hp) + dim(hq) == len(tree.inner) and dim(hp) == len(tp.tree.inner) and dim(hq) == len(tq.tree.inner)
    return ok, f"dim H_p={dim(hp)} dim H_q={dim(hq)}"


def check_basis_geometry():
    cfg, tree, _ = _example()
    basis = build_symplectic_basis(cfg, tree)
    imat = intersection_matrix(basis.A + basis.B, basis.frame)
    exact = np.array_equal(imat, standard_form(2))
    classes = all(class_in_H(a) == class_abar(tree, v) for a, v in zip(basis.A, basis.vertices))
    return exact and classes, f"intersection={imat.tolist()} classes_match={classes}"


def check_loop_monodromy():
    cfg, tree, _ = _example()
    frame = choose_base_point(cfg, tree.leaf_cycle())
    forms = DifferentialBasis.for_config(cfg).forms
    worst = 0.0
    for k in range(cfg.m):
        pts, _, _ = loop_polyline(frame, k, frame.base, frame.radius)
        start = sheet_values(cfg, frame.base, 0)
        _, end = integrate_polyline(cfg, forms, pts, start)
        worst = max(worst, abs(end[1] / start[1] - OMEGA ** cfg.indices[k]))
    return worst < 1e-12, f"max deviation {worst:.1e}"


def check_a11_real_integral():
    cfg, tree, _ = _example()
    pd = period_matrices(cfg, tree)
    real, _ = quad(lambda x: (x ** 2 * (1 - x) ** 2 * (2 - x) * (3 - x)) ** (-1 / 3), 0, 1, limit=200)
    r = pd.P_A[0, 0] / ((OMEGA ** 2 - 1) * real)
    # equal up to the cube root of unity fixed by the branch of y1 at the base point
    dev = min(abs(r - OMEGA ** k) for k in range(3))
    return dev < 1e-9, f"a11/((w^2-1) I) = {r:.12f}"


def check_b_over_a():
    cfg, tree, _ = _example()
    pd = period_matrices(cfg, tree)
    ratio = pd.P_B / pd.P_A
    want = np.array([[OMEGA ** 2, OMEGA], [OMEGA, OMEGA ** 2]])
    dev = float(np.max(np.abs(ratio - want)))
    return dev < 1e-10, f"max deviation {dev:.1e}"


def check_chowla_selberg():
    tv = theta_constant([[OMEGA]], [Fraction(1, 6)], [Fraction(-1, 6)])
    rel = abs(tv.value ** 6 / chowla_selberg_value() - 1)
    return rel < 1e-10, f"relative error {rel:.1e}"


def check_characteristic():
    cfg, tree, lam = _example()
    rc = riemann_constant(2)
    chi = characteristic_of(tree, lam, cfg.indices)
    want = Characteristic.parse("5/6,5/6;1/6,1/6")
    ok = rc == Characteristic.parse("1/2,1/2;1/2,1/2") and chi == want
    return ok, f"{chi.as_strings()}"


def check_delta_kappa():
    cfg, _, lam = _example()
    d = delta_product(cfg, lam)
    k2 = kappa(2)
    closed_form = cmath.exp(1j * math.pi / 6) / (3 * math.sqrt(3) * (2 * math.pi) ** 6)
    ok = abs(d + 16) < 1e-12 and abs(k2 / closed_form - 1) < 1e-12
    return ok, f"Delta={d.real:g} kappa^2/closed_form={k2 / closed_form:.12f}"


def check_example7_double():
    rep = run_example7("double")
    return rep.ok, f"relative error {rep.rel_error:.1e}"


def check_example7_extended():
    rep = run_example7("extended")
    return rep.ok, f"relative error {rep.rel_error:.1e}"


def check_merged_index():
    ok = merged_indices((2, 2, 1, 1), 2) == (2, 2, 2) and merged_indices((2, 2, 1, 1), 0) == (1, 1, 1)
    return ok, f"{merged_indices((2, 2, 1, 1), 2)} {merged_indices((2, 2, 1, 1), 0)}"


def check_factorization():
    from .degeneration import theta_factorization_check

    cfg, tree, lam = _example()
    rep = theta_factorization_check(cfg, tree, 2, lam)
    shrinking = all(a > b for a, b in zip(rep.offdiag, rep.offdiag[1:]))
    return rep.first_factor_rel < 1e-4 and shrinking, \
        f"first factor rel {rep.first_factor_rel:.1e}, off-diagonal {rep.offdiag[-1]:.1e}"


CHECKS: dict[str, Callable[[], tuple[bool, str]]] = {
    "example_tree_valid": check_example_tree,
    "simplest_tree": check_simplest_tree,
    "example_classes": check_example_classes,
    "equidistribution": check_equidistribution,
    "direct_sum": check_direct_sum,
    "basis_geometry": check_basis_geometry,
    "loop_monodromy": check_loop_monodromy,
    "a11_real_integral": check_a11_real_integral,
    "b_over_a": check_b_over_a,
    "chowla_selberg": check_chowla_selberg,
    "characteristic": check_characteristic,
    "delta_kappa": check_delta_kappa,
    "example7_double": check_example7_double,
    "example7_extended": check_example7_extended,
    "merged_index": check_merged_index,
    "factorization": check_factorization,
}


def run_selftest(skip_extended: bool = False) -> list[CheckResult]:
    out = []
    for name, fn in CHECKS.items():
        if skip_extended and name.endswith("extended"):
            continue
        start = time.perf_counter()
        try:
            ok, detail = fn()
        except Exception as exc:  # a crash is a failed check, not a crashed run
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(ok), detail, time.perf_counter() - start))
    return out
