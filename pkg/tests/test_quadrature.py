import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.special import beta as scipy_beta

from tricover.quadrature import adaptive, beta, gauss_legendre, integrate_unit, integrate_unit_mp, tanh_sinh


def test_smooth_polynomial():
    res = tanh_sinh(lambda t, u: t ** 3, 0, 1)
    assert abs(res.value - 0.25) < 1e-14


def test_beta_third_third_against_scipy():
    assert abs(beta(1 / 3, 1 / 3) / scipy_beta(1 / 3, 1 / 3) - 1) < 1e-13


@given(st.sampled_from([1, 2]), st.sampled_from([1, 2]))
def test_cube_root_endpoint_singularities(a, b):
    # int_0^1 t^(-a/3) (1-t)^(-b/3) dt = B(1 - a/3, 1 - b/3)
    res = integrate_unit(lambda t, u: t ** (-a / 3) * u ** (-b / 3))
    want = scipy_beta(1 - a / 3, 1 - b / 3)
    assert abs(res.value / want - 1) < 1e-12


def test_interior_kink():
    f = lambda t, u: np.abs(t - 0.3) ** 0.5
    res = integrate_unit(f, breakpoints=[0.3])
    want = (0.3 ** 1.5 + 0.7 ** 1.5) / 1.5
    assert abs(res.value - want) < 1e-11


def test_vector_valued_integrand():
    f = lambda t, u: np.stack([t, t ** 2, np.exp(t)], axis=-1)
    res = adaptive(f, 0, 1)
    assert np.allclose(res.value, [0.5, 1 / 3, math.e - 1], atol=1e-14)


def test_extended_precision_beta():
    with mp.workdps(40):
        val, err = integrate_unit_mp(lambda t, u: t ** (-mp.mpf(2) / 3) * u ** (-mp.mpf(2) / 3), dps=40)
        want = mp.beta(mp.mpf(1) / 3, mp.mpf(1) / 3)
        assert abs(val / want - 1) < mp.mpf(10) ** -35


@pytest.mark.parametrize("n", [4, 12, 24])
def test_gauss_legendre_exact_for_polynomials(n):
    s, w = gauss_legendre(n)
    for k in range(2 * n):
        assert abs(np.sum(w * s ** k) - 1 / (k + 1)) < 1e-13
