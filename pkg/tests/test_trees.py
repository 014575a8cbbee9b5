import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from tricover.io import parse_config
from tricover.selftest import SIMPLEST
from tricover.trees import (BranchConfig, F3Class, TreeError, abar_basis_expand, abar_combination, abar_matrix,
                            all_marked_trees, as_class, blocks_at, class_abar, colour_patterns, decompose,
                            degenerate_class, distribution_counts, equidistributed_vectors, f3_rank, f3_solve,
                            globalize, h_subspace, in_kernel, is_equidistributed, kernel_classes, make_tree,
                            merge_vertex_ok, merged_indices, merged_tree, normalize, split_class, validate_tree)


def test_example_tree_is_valid_genus_two(example):
    config, tree, _ = example
    rep = validate_tree(tree, config)
    assert rep.ok and rep.genus == 2


def test_simplest_case_blocks_and_class():
    config, tree, _ = parse_config(SIMPLEST)
    assert validate_tree(tree, config).genus == 1
    assert blocks_at(tree, "v") == ([0], [1], [2])
    assert class_abar(tree, "v") == F3Class((-1, 1, 0))


def test_rotation_toggle_swaps_blocks():
    config, tree, _ = parse_config(SIMPLEST)
    assert blocks_at(tree, "v", rotation=-1) == ([1], [0], [2])


def test_monochromatic_edge_rejected(example):
    config, tree, _ = example
    inner = [{"id": v.id, "color": "white", "adj": list(v.adj), "mark": v.mark} for v in tree.inner]
    leaves = [{"id": l.id, "branch": l.branch} for l in tree.leaves]
    rep = validate_tree(make_tree(inner, leaves), config)
    assert not rep.ok
    assert any(e["message"] == "monochromatic edge" for e in rep.errors)


def test_mark_must_be_adjacent(example):
    config, tree, _ = example
    inner = [{"id": v.id, "color": v.color, "adj": list(v.adj), "mark": "t4" if v.id == "p" else v.mark}
             for v in tree.inner]
    leaves = [{"id": l.id, "branch": l.branch} for l in tree.leaves]
    rep = validate_tree(make_tree(inner, leaves), config)
    assert not rep.checks["marking"]


def test_leaf_binding_and_vertex_count(example):
    config, tree, _ = example
    extra = BranchConfig(config.points + (5j, 6j, 7j), config.indices + (1, 1, 1))
    rep = validate_tree(tree, extra)
    assert not rep.checks["leaf_binding"] and not rep.checks["vertex_count"]


def test_config_problems():
    assert BranchConfig((0, 1, 2), (1, 1, 2)).problems()
    assert BranchConfig((0, 0, 2), (1, 1, 1)).problems()
    assert BranchConfig((0, 1), (1, 2)).problems()
    assert not BranchConfig((0, 1, 2), (1, 1, 1)).problems()


def test_example_classes_and_expansion(example):
    config, tree, lam = example
    assert class_abar(tree, "p") == F3Class((-1, 1, 0, 0))
    assert class_abar(tree, "q") == F3Class((0, 0, -1, 1))
    coeffs = abar_basis_expand(tree, lam, config.indices)
    assert {v: c % 3 for v, c in coeffs.items()} == {"p": 1, "q": 2}
    assert abar_combination(tree, coeffs) == F3Class(lam)


def test_lambda_outside_kernel_rejected(example):
    config, tree, _ = example
    with pytest.raises(TreeError):
        abar_basis_expand(tree, (1, 0, 0, 0), config.indices)
    with pytest.raises(TreeError):
        as_class(config.indices, (1, 0, 0, 0))


def test_equidistribution_examples():
    assert is_equidistributed((2, 2, 1, 1), (2, 1, 1, 2))
    assert is_equidistributed((1,) * 6, (0, 0, 1, 1, 2, 2))
    assert not is_equidistributed((1,) * 6, (0, 0, 0, 1, 1, 2))
    assert distribution_counts((2, 2, 1, 1), (2, 1, 1, 2)) == {"white": [0, 1, 1], "black": [0, 1, 1]}


def test_direct_sum_dimensions(example):
    config, tree, _ = example
    hp = h_subspace(tree, config.indices, ("p", "q"), "p")
    hq = h_subspace(tree, config.indices, ("p", "q"), "q")
    assert len(hp) * len(hq) == 3 ** len(tree.inner)
    assert hp & hq == {normalize((0, 0, 0, 0))}


def test_split_of_vertex_class_has_empty_far_part(example):
    config, tree, _ = example
    lam_p, lam_q = split_class(tree, config.indices, ("p", "q"), class_abar(tree, "p").coeffs)
    tp, tq = decompose(tree, config.indices, ("p", "q"))
    assert globalize(lam_q, tq, config.m) == F3Class((0, 0, 0, 0))
    assert globalize(lam_p, tp, config.m) == class_abar(tree, "p")


def test_merge_of_example_cherry(example):
    config, tree, lam = example
    assert merge_vertex_ok(tree, 2)
    assert merged_indices(config.indices, 2) == (2, 2, 2)
    assert degenerate_class(lam, 2, config.indices) == (2, 1, 0)
    lim = merged_tree(tree, 2)
    assert validate_tree(lim, BranchConfig((0, 1, 2.5), (2, 2, 2))).ok


def test_merge_needs_same_colour(example):
    config, _, lam = example
    with pytest.raises(TreeError):
        degenerate_class(lam, 1, config.indices)


def test_f3_solve_and_rank():
    a = np.array([[1, 2], [0, 1], [2, 2]])
    x = np.array([2, 1])
    b = a @ x % 3
    sol = f3_solve(a, b)
    assert np.array_equal(a @ sol % 3, b)
    assert f3_rank(a) == 2
    assert f3_solve(np.array([[1], [1]]), np.array([0, 1])) is None


def test_colour_patterns_cover_rotation_classes():
    pats = colour_patterns(4)
    assert (1, 1, 2, 2) in pats and (1, 2, 1, 2) in pats
    assert all(sum(p) % 3 == 0 for p in pats)


# -- properties ---------------------------------------------------------------

small_patterns = [p for m in (3, 4, 5) for p in colour_patterns(m)]
trees_m5 = [(p, t) for p in small_patterns for t in all_marked_trees(list(range(len(p))), p)]


@given(st.sampled_from(trees_m5), st.data())
def test_expansion_round_trip(item, data):
    indices, tree = item
    kern = kernel_classes(indices)
    lam = data.draw(st.sampled_from(kern))
    coeffs = abar_basis_expand(tree, lam, indices)
    assert abar_combination(tree, coeffs) == F3Class(lam)


@given(st.sampled_from(trees_m5))
def test_abar_columns_are_a_basis_of_the_kernel(item):
    indices, tree = item
    mat = abar_matrix(tree)
    assert all(in_kernel(indices, col) for col in mat.T)
    # with the diagonal they span Ker(Pi)
    diag = np.ones((len(indices), 1), dtype=np.int64)
    assert f3_rank(np.hstack([mat, diag])) == len(tree.inner) + 1


@given(st.sampled_from(trees_m5), st.data())
def test_degenerate_class_preserves_equidistribution(item, data):
    indices, tree = item
    pairs = [(i, j) for i, j in itertools.combinations(range(len(indices)), 2)
             if indices[i] == indices[j] and merge_vertex_ok(tree, i, j)]
    vecs = equidistributed_vectors(indices)
    if not pairs or not vecs:
        return
    i, j = data.draw(st.sampled_from(pairs))
    lam = data.draw(st.sampled_from(vecs))
    if lam[i] == lam[j]:
        return
    assert is_equidistributed(merged_indices(indices, i, j), degenerate_class(lam, i, indices, j))
