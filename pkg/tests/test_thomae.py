import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tricover.thomae import (VerificationError, delta_degree, delta_product, example7_rhs, kappa, pair_product,
                             run_example7, verify_thomae)
from tricover.trees import BranchConfig

from conftest import PATTERNS, random_instance, random_lambda


def test_example_delta(example):
    config, _, lam = example
    assert delta_product(config, lam) == -16


def test_kappa_squared_matches_closed_form():
    closed_form = cmath.exp(1j * math.pi / 6) / (3 * math.sqrt(3) * (2 * math.pi) ** 6)
    assert abs(kappa(2) / closed_form - 1) < 1e-14


def test_pair_product_conventions():
    pts = [0, 1, 3]
    assert pair_product([0, 1, 2], [0, 1, 2], pts) == (0 - 1) * (0 - 3) * (1 - 3)
    assert pair_product([0], [2], pts) == -3
    with pytest.raises(ValueError):
        pair_product([0, 1], [1], pts)


def test_all_white_delta_reduces():
    # all white m=6: Delta = prod (L_i L_i)^3 prod_{i<j} (L_i L_j)
    rng = np.random.default_rng(3)
    pts = tuple(rng.normal(size=6) + 1j * rng.normal(size=6))
    config = BranchConfig(pts, (1,) * 6)
    lam = (0, 1, 2, 0, 1, 2)
    sets = [[0, 3], [1, 4], [2, 5]]
    want = 1
    for s in sets:
        want *= (pts[s[0]] - pts[s[1]]) ** 3
    for i in range(3):
        for j in range(i + 1, 3):
            for a in sets[i]:
                for b in sets[j]:
                    want *= pts[a] - pts[b]
    assert abs(delta_product(config, lam) / want - 1) < 1e-12


@given(st.integers(0, 10_000), st.floats(0.5, 2.0))
def test_delta_homogeneity(seed, c):
    rng = np.random.default_rng(seed)
    config, _ = random_instance(rng, (1, 1, 1, 2, 2, 2))
    lam = random_lambda(rng, config.indices)
    scaled = BranchConfig(tuple(c * z for z in config.points), config.indices)
    ratio = delta_product(scaled, lam) / delta_product(config, lam)
    assert abs(ratio / c ** delta_degree(config, lam) - 1) < 1e-9


def test_example_double_and_extended():
    d = run_example7("double")
    assert d.ok and d.rel_error < 1e-12
    e = run_example7("extended")
    assert e.ok and e.rel_error < 1e-25
    assert e.characteristic.as_strings() == {"alpha": ["5/6", "5/6"], "beta": ["1/6", "1/6"]}


def test_example_rhs_uses_explicit_product(example):
    config, _, _ = example
    # the explicit product is (l2-l1)(l4-l3)(l3-l1)^2(l4-l2)^2 = 16 = -Delta
    assert abs(example7_rhs(config, 1.0) / (16 * kappa(2)) - 1) < 1e-14


def test_non_equidistributed_lambda_rejected(example):
    config, tree, _ = example
    with pytest.raises(VerificationError) as err:
        verify_thomae(config, tree, (1, 0, 0, 0))
    assert err.value.stage == "tree"


@given(st.sampled_from([p for ps in PATTERNS.values() for p in ps]), st.integers(0, 10_000))
def test_thomae_on_random_instances(pattern, seed):
    rng = np.random.default_rng(seed)
    config, tree = random_instance(rng, pattern)
    lam = random_lambda(rng, config.indices)
    rep = verify_thomae(config, tree, lam)
    assert rep.modulus_dev < 1e-6 and rep.phase_test < 1e-5
