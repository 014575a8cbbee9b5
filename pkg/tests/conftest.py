import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from tricover.cycles import choose_base_point
from tricover.io import parse_config
from tricover.thomae import EXAMPLE7
from tricover.trees import BranchConfig, TreeError, equidistributed_vectors, random_tree

settings.register_profile("default", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", deadline=None, max_examples=200,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def example():
    return parse_config(EXAMPLE7)


def random_instance(rng, pattern):
    """Random points, a random permutation of the index pattern and a compatible tree."""
    m = len(pattern)
    while True:
        config = BranchConfig(tuple(rng.normal(size=m) + 1j * rng.normal(size=m)), tuple(rng.permutation(pattern)))
        frame = choose_base_point(config)
        try:
            tree = random_tree(list(frame.order[::-1]), config.indices, rng)
        except TreeError:
            continue
        return config, tree


def random_lambda(rng, indices):
    vecs = equidistributed_vectors(indices)
    return vecs[int(rng.integers(len(vecs)))] if vecs else None


PATTERNS = {
    4: [(2, 2, 1, 1), (1, 1, 2, 2)],
    5: [(1, 1, 1, 1, 2), (2, 2, 2, 2, 1)],
    6: [(1,) * 6, (2,) * 6, (1, 1, 1, 2, 2, 2)],
}
