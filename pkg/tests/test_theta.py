import itertools
import math
from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import example, given, strategies as st

from tricover.periods import OMEGA
from tricover.theta import (Characteristic, ThetaError, chowla_selberg_value, ellipsoid_points, radius_for,
                            riemann_constant, sixth_power_periodicity_check, tail_bound, theta_constant,
                            _cholesky_upper)

F = Fraction


def test_chowla_selberg_constant():
    tv = theta_constant([[OMEGA]], [F(1, 6)], [F(-1, 6)])
    assert abs(tv.value ** 6 / chowla_selberg_value() - 1) < 1e-10


def test_theta_at_i():
    # theta_3(i) = pi^(1/4) / Gamma(3/4)
    tv = theta_constant([[1j]], [0], [0])
    assert abs(tv.value - math.pi ** 0.25 / math.gamma(0.75)) < 1e-15


def test_odd_characteristic_vanishes():
    tau = np.array([[1.1j + 0.2, 0.3], [0.3, 0.9j - 0.1]])
    tv = theta_constant(tau, [F(1, 2), 0], [F(1, 2), 0])
    assert abs(tv.value) < 1e-14


def test_extended_matches_double():
    tau = np.array([[-0.5 + 0.9j, 0.2 + 0.1j], [0.2 + 0.1j, 0.3 + 1.2j]])
    a, b = [F(5, 6), F(1, 6)], [F(1, 6), F(5, 6)]
    d = theta_constant(tau, a, b)
    with mp.workdps(30):
        e = theta_constant(tau, a, b, eps=1e-30, dps=30)
    assert abs(d.value - e.value) < 1e-14


def test_negative_imaginary_part_rejected():
    with pytest.raises(ThetaError):
        theta_constant([[0.3 - 1j]], [0], [0])


def test_riemann_constant_and_parse():
    assert riemann_constant(2) == Characteristic.parse("1/2,1/2;1/2,1/2")
    chi = Characteristic.parse("5/6,-1/6;7/6,1/6")
    assert chi.alpha == (F(5, 6), F(5, 6)) and chi.beta == (F(1, 6), F(1, 6))
    with pytest.raises(ValueError):
        Characteristic.parse("1/2;")
    with pytest.raises(ValueError):
        Characteristic.parse("nonsense")


def test_tail_bound_decreases():
    vals = [tail_bound(r, 3, 1.0) for r in (2, 3, 4, 5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))
    assert tail_bound(radius_for(1e-14, 3, 1.0), 3, 1.0) <= 1e-14


@given(st.integers(0, 10_000))
def test_ellipsoid_enumeration_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(2, 2))
    y = a @ a.T + 0.5 * np.eye(2)
    t = _cholesky_upper(y)
    c = rng.random(2)
    radius = 2.5
    got = {tuple(int(v) for v in p) for p in ellipsoid_points(t, c, radius)}
    want = set()
    for n in itertools.product(range(-15, 16), repeat=2):
        if np.linalg.norm(t @ (np.array(n) + c)) <= radius - 1e-9:
            want.add(n)
    assert want <= got
    assert all(np.linalg.norm(t @ (np.array(n) + c)) <= radius + 1e-9 for n in got)


def _random_tau(rng, g):
    a = rng.normal(size=(g, g))
    im = a @ a.T + 0.6 * np.eye(g)
    re = rng.normal(size=(g, g))
    return 0.5 * (re + re.T) + 1j * im


@given(st.integers(0, 10_000), st.integers(1, 3))
@example(917, 2)  # odd characteristic, theta vanishes
def test_sixth_power_is_periodic(seed, g):
    rng = np.random.default_rng(seed)
    tau = _random_tau(rng, g)
    chi = Characteristic(tuple(F(int(k), 6) for k in rng.integers(0, 6, g)),
                         tuple(F(int(k), 6) for k in rng.integers(0, 6, g)))
    rep = sixth_power_periodicity_check(tau, chi, rng=rng)
    assert rep.ok


@given(st.integers(0, 10_000))
def test_theta_constant_even_in_characteristic(seed):
    rng = np.random.default_rng(seed)
    tau = _random_tau(rng, 2)
    a = [F(int(k), 6) for k in rng.integers(0, 6, 2)]
    b = [F(int(k), 6) for k in rng.integers(0, 6, 2)]
    plus = theta_constant(tau, a, b).value
    minus = theta_constant(tau, [-x for x in a], [-x for x in b]).value
    assert abs(plus - minus) < 1e-12 * max(1.0, abs(plus))
