import math

import numpy as np
import pytest

from tricover.degeneration import (DegenerationError, beta_star, check_detPB_limit, check_period_limits,
                                   check_trivial_monodromy, family_merge, family_scale, limit_config,
                                   limit_periods, merge_setup, richardson, scale_subset_for_edge,
                                   theta_factorization_check, transported_periods)
from tricover.quadrature import beta
from tricover.trees import BranchConfig, TreeError, merge_vertex_ok

from conftest import random_instance


@pytest.fixture
def shifted(example):
    config, tree, lam = example
    return BranchConfig(tuple(z - 0.5 for z in config.points), config.indices), tree, lam


def test_family_merge_endpoints(example):
    config, _, _ = example
    assert family_merge(config, 2, 2.5, 1.0) == config
    half = family_merge(config, 2, 2.5, 0.5)
    assert half.points[2] == 2.25 and half.points[3] == 2.75
    with pytest.raises(ValueError):
        family_merge(config, 2, 2.5, 0.0)


def test_family_merge_collision(example):
    config, _, _ = example
    # lambda_3 passes through lambda_2 = 1 on the way to tilde = 0
    with pytest.raises(DegenerationError):
        family_merge(config, 2, 0.0, 0.5)


def test_family_scale(example):
    config, _, _ = example
    assert family_scale(config, [0, 1], 1) == config
    with pytest.raises(DegenerationError):
        family_scale(config, [0, 1], 0)


def test_limit_index_is_sum_mod_three(example):
    config, _, _ = example
    assert limit_config(config, 2, 2.5).indices == (2, 2, 2)
    assert limit_config(config, 0, 0.5).indices == (1, 1, 1)


def test_richardson_recovers_polynomial_limit():
    hs = [0.4, 0.2, 0.1, 0.05]
    f = lambda h: 3 - 2j + 0.7 * h - 1.1 * h ** 2 + 0.2 * h ** 3
    val, err = richardson(hs, [f(h) for h in hs])
    assert abs(val - (3 - 2j)) < 1e-12
    # the error estimate drops the coarsest point, so it sees the cubic term
    assert 0 < err < 1e-3
    quad_val, quad_err = richardson(hs, [f(h) - 0.2 * h ** 3 for h in hs])
    assert quad_err < 1e-12


def test_merge_requires_cherry(example):
    config, tree, _ = example
    with pytest.raises(TreeError):
        merge_setup(config, tree, 1)


def test_white_merge_limits(example):
    config, tree, _ = example
    rep = check_period_limits(config, tree, 2, 2.5)
    assert rep.ok
    blow = rep.item("blowup_cube")
    assert blow.rel_error < 1e-4
    assert abs(rep.item("vanish_slope").slope - 1 / 3) < 0.02
    limits = [it for it in rep.items if it.name.startswith("limit")]
    assert limits and all(it.rel_error < 1e-4 for it in limits)
    assert len(blow.values) == 4  # raw sequence kept in the report


def test_beta_star():
    assert abs(beta_star() - (np.exp(2j * np.pi / 3) - 1) * beta(1 / 3, 1 / 3)) < 1e-14


def test_det_limit_and_row_expansion(example):
    config, tree, _ = example
    det = check_detPB_limit(config, tree, 2, 2.5)
    assert det.ok and det.item.rel_error < 1e-3
    rep = check_period_limits(config, tree, 2, 2.5)
    _, _, LBs, _ = limit_periods(rep.setup)
    expanded = det.sign * rep.item("blowup_cube").extrapolated * np.linalg.det(LBs) ** 3
    assert abs(det.item.extrapolated / expanded - 1) < 1e-4


def test_det_limit_independent_of_t_sequence(example):
    config, tree, _ = example
    a = check_detPB_limit(config, tree, 2, 2.5, (1e-2, 1e-3, 1e-4, 1e-5))
    b = check_detPB_limit(config, tree, 2, 2.5, (3e-3, 3e-4, 3e-5, 3e-6))
    assert abs(a.item.extrapolated / b.item.extrapolated - 1) < 1e-4


def test_black_merge_is_an_experiment(example):
    config, tree, _ = example
    rep = check_period_limits(config, tree, 0, 0.5)
    assert rep.item("blowup_cube").target is None
    with pytest.raises(DegenerationError):
        check_detPB_limit(config, tree, 0, 0.5)


def test_theta_factorisation(example):
    config, tree, lam = example
    rep = theta_factorization_check(config, tree, 2, lam, 2.5)
    assert rep.ok
    assert abs(rep.tau_pp - np.exp(2j * np.pi / 3)) < 1e-4
    assert all(a > b for a, b in zip(rep.offdiag, rep.offdiag[1:]))
    assert rep.restriction_ok and rep.lambda_limit == (2, 1, 0)


def test_factorisation_needs_distinct_labels(example):
    config, tree, _ = example
    with pytest.raises(TreeError):
        theta_factorization_check(config, tree, 2, (0, 0, 0, 0))


def test_white_merge_on_random_six_point_curve():
    rng = np.random.default_rng(17)
    for _ in range(50):
        config, tree = random_instance(rng, (1, 1, 1, 2, 2, 2))
        pairs = [(i, j) for i in range(6) for j in range(i + 1, 6)
                 if config.indices[i] == config.indices[j] == 1 and merge_vertex_ok(tree, i, j)]
        for i, j in pairs:
            try:
                det = check_detPB_limit(config, tree, i, j=j)
            except DegenerationError:
                continue
            assert det.ok
            return
    pytest.skip("no usable instance found")


def test_monodromy_trivial_after_three_turns(shifted):
    config, tree, _ = shifted
    subset = scale_subset_for_edge(tree, ("p", "q"))
    assert subset == [0, 1]
    rep = check_trivial_monodromy(config, tree, subset)
    assert rep.drift < 1e-6
    assert rep.control_drift > 1e-2
    assert rep.identity_drift < 1e-12


def test_transport_requires_closed_family(shifted):
    config, tree, _ = shifted
    with pytest.raises(ValueError):
        transported_periods(config, tree, [0, 1], math.pi)


def test_cluster_must_be_separated(example):
    config, tree, _ = example
    with pytest.raises(DegenerationError):
        check_trivial_monodromy(config, tree, [2, 3])
