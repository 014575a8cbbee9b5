"""Acceptance criteria A1-A7, one PASS/FAIL line each.

Run with ``pytest tests/test_acceptance.py -v`` or directly with
``python3 tests/test_acceptance.py``.
"""
import itertools
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from tricover.cycles import build_symplectic_basis, choose_base_point, class_in_H, intersection_matrix, standard_form
from tricover.degeneration import (check_detPB_limit, check_period_limits, check_trivial_monodromy,
                                   scale_subset_for_edge, theta_factorization_check)
from tricover.io import parse_config
from tricover.periods import OMEGA
from tricover.theta import chowla_selberg_value, theta_constant
from tricover.thomae import EXAMPLE7, run_example7, verify_thomae
from tricover.trees import (BranchConfig, F3Class, abar_basis_expand, abar_combination, all_marked_trees, class_abar,
                            colour_patterns, decompose, degenerate_class, globalize, h_subspace, in_kernel,
                            is_equidistributed, merge_vertex_ok, merged_indices, normalize,
                            split_class)

from conftest import random_instance, random_lambda


def report(name: str, ok: bool, detail: str) -> None:
    print(f"{name} {'PASS' if ok else 'FAIL'}  {detail}", flush=True)


# --------------------------------------------------------------------------
# criteria
# --------------------------------------------------------------------------


def criterion_a1():
    start = time.perf_counter()
    tv = theta_constant([[OMEGA]], [Fraction(1, 6)], [Fraction(-1, 6)])
    rel = abs(tv.value ** 6 / chowla_selberg_value() - 1)
    secs = time.perf_counter() - start
    return rel < 1e-10 and secs < 1, f"theta^6 at tau=omega, rel error {rel:.1e} (< 1e-10), {secs:.2f} s (< 1 s)"


def criterion_a2():
    start = time.perf_counter()
    ext = run_example7("extended")
    dbl = run_example7("double")
    secs = time.perf_counter() - start
    ok = ext.rel_error < 1e-8 and dbl.rel_error < 1e-6 and secs < 30
    return ok, (f"genus-2 identity, extended {ext.rel_error:.1e} (< 1e-8), double {dbl.rel_error:.1e} (< 1e-6), "
                f"{secs:.1f} s (< 30 s)")


A3_PATTERNS = [(2, 2, 1, 1), (1, 1, 2, 2), (1, 1, 1, 1, 2), (2, 2, 2, 2, 1),
               (1,) * 6, (2,) * 6, (1, 1, 1, 2, 2, 2)]


def criterion_a3(per_pattern: int = 4, seed: int = 2024):
    start = time.perf_counter()
    rng = np.random.default_rng(seed)
    n = 0
    worst_phase = worst_mod = 0.0
    all_white_six = 0
    for pattern in A3_PATTERNS:
        for _ in range(per_pattern):
            config, tree = random_instance(rng, pattern)
            lam = random_lambda(rng, config.indices)
            rep = verify_thomae(config, tree, lam)
            worst_phase = max(worst_phase, rep.phase_test)
            worst_mod = max(worst_mod, rep.modulus_dev)
            n += 1
            all_white_six += pattern == (1,) * 6
    secs = time.perf_counter() - start
    ok = n >= 20 and all_white_six > 0 and worst_phase < 1e-5 and worst_mod < 1e-6 and secs < 600
    return ok, (f"{n} random instances (m=4,5,6; {all_white_six} all-white m=6), max |r^6/k^6g - 1| "
                f"{worst_phase:.1e} (< 1e-5), max ||r|/|k|^g - 1| {worst_mod:.1e} (< 1e-6), {secs:.1f} s")


def _polygon_config(pattern):
    m = len(pattern)
    rng = np.random.default_rng(m)
    pts = np.exp(2j * np.pi * (np.arange(m) + 0.1 * rng.random(m)) / m) * (1 + 0.1 * rng.random(m))
    return BranchConfig(tuple(pts), pattern)


def criterion_a4(max_m: int = 7):
    start = time.perf_counter()
    n = bad = 0
    for m in range(3, max_m + 1):
        for pattern in colour_patterns(m):
            config = _polygon_config(pattern)
            frame = choose_base_point(config)
            for tree in all_marked_trees(list(frame.order[::-1]), pattern):
                basis = build_symplectic_basis(config, tree, frame, check=False)
                exact = np.array_equal(intersection_matrix(basis.A + basis.B, frame), standard_form(len(basis.A)))
                classes = all(class_in_H(a) == class_abar(tree, v) for a, v in zip(basis.A, basis.vertices))
                n += 1
                bad += not (exact and classes)
    secs = time.perf_counter() - start
    return bad == 0 and n > 0, (f"{n} marked trees (all colourings, shapes, marks, m <= {max_m}), "
                                f"{bad} with inexact intersection form or class mismatch, {secs:.1f} s")


def criterion_a5():
    start = time.perf_counter()
    config, tree, lam = parse_config(EXAMPLE7)
    limits = check_period_limits(config, tree, 2, 2.5)
    blow = limits.item("blowup_cube")
    det = check_detPB_limit(config, tree, 2, 2.5)
    fact = theta_factorization_check(config, tree, 2, lam, 2.5)
    secs = time.perf_counter() - start
    ok = blow.rel_error < 1e-3 and det.item.rel_error < 1e-3 and fact.rel_error < 1e-4 and secs < 300
    return ok, (f"m=4 white merge, blow-up period {blow.rel_error:.1e} (< 1e-3), det P_B {det.item.rel_error:.1e} "
                f"(< 1e-3), theta factorisation {fact.rel_error:.1e} (< 1e-4), {secs:.1f} s")


def criterion_a6():
    config, tree, _ = parse_config(EXAMPLE7)
    shifted = BranchConfig(tuple(z - 0.5 for z in config.points), config.indices)
    subset = scale_subset_for_edge(tree, ("p", "q"))
    rep = check_trivial_monodromy(shifted, tree, subset)
    ok = rep.drift < 1e-6 and rep.control_drift > 1e-3
    return ok, f"drift after one loop of t^(1/3) {rep.drift:.1e} (< 1e-6), one loop of t {rep.control_drift:.2f} (nonzero)"


def criterion_a7(max_m: int = 5):
    start = time.perf_counter()
    trees = checked = bad = 0
    for m in range(3, max_m + 1):
        for pattern in colour_patterns(m):
            kernel = [v for v in itertools.product(range(3), repeat=m) if in_kernel(pattern, v)]
            for tree in all_marked_trees(list(range(m)), pattern):
                trees += 1
                edges = tree.inner_edges()
                cherries = [(i, j) for i, j in itertools.combinations(range(m), 2)
                            if pattern[i] == pattern[j] and merge_vertex_ok(tree, i, j)]
                subspaces = {e: (h_subspace(tree, pattern, e, "p"), h_subspace(tree, pattern, e, "q")) for e in edges}
                for lam in kernel:
                    checked += 1
                    ok = abar_combination(tree, abar_basis_expand(tree, lam, pattern)) == F3Class(lam)
                    for e in edges:
                        lp, lq = split_class(tree, pattern, e, lam)
                        tp, tq = decompose(tree, pattern, e)
                        gp, gq = globalize(lp, tp, m), globalize(lq, tq, m)
                        hp, hq = subspaces[e]
                        ok &= gp + gq == F3Class(lam)
                        ok &= normalize(gp.coeffs) in hp and normalize(gq.coeffs) in hq
                        ok &= len(hp) * len(hq) == 3 ** len(tree.inner) and len(hp & hq) == 1
                    if is_equidistributed(pattern, lam):
                        for i, j in cherries:
                            if lam[i] != lam[j]:
                                ok &= is_equidistributed(merged_indices(pattern, i, j),
                                                         degenerate_class(lam, i, pattern, j))
                    bad += not ok
    secs = time.perf_counter() - start
    return bad == 0 and secs < 10, (f"{trees} marked trees (m <= {max_m}) x Ker(Pi): {checked} cases, {bad} failures, "
                                    f"{secs:.1f} s (< 10 s)")


CRITERIA = {"A1": criterion_a1, "A2": criterion_a2, "A3": criterion_a3, "A4": criterion_a4,
            "A5": criterion_a5, "A6": criterion_a6, "A7": criterion_a7}


@pytest.mark.parametrize("name", list(CRITERIA))
def test_criterion(name, capsys):
    ok, detail = CRITERIA[name]()
    with capsys.disabled():
        print()
        report(name, ok, detail)
    assert ok, detail


if __name__ == "__main__":
    failed = 0
    for name, fn in CRITERIA.items():
        ok, detail = fn()
        report(name, ok, detail)
        failed += not ok
    sys.exit(1 if failed else 0)
