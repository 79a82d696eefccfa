import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from halfelastica.period import ClosureSpec, solve_closure
from halfelastica.roots import (
    INFINITY,
    AdmissibilityError,
    Region,
    classify,
    eta,
    eta_hat,
    make_parameters,
    quartic_Q,
    quartic_roots,
    u_star,
    xi_of,
)


def test_eta_values():
    assert eta(0.0) == pytest.approx(1.0, abs=1e-15)
    assert abs(eta(-0.2) - 1.117181339509767) < 1e-9
    x = eta(1.5)
    assert 0 < x < 1
    assert abs(x**4 + 3 * x**3 - 1) < 1e-12


@pytest.mark.parametrize("lam", [-3.0, -1.0, -0.2, 0.0, 0.4, 2.0, 50.0])
def test_eta_is_the_mpmath_root(lam):
    ref = mp.findroot(lambda t: t**4 + 2 * lam * t**3 - 1, eta(lam))
    assert abs(eta(lam) - float(ref)) < 1e-14 * float(ref)


def test_u_star_values():
    assert u_star(0.5) is INFINITY
    assert u_star(0.0) is INFINITY
    assert round(u_star(-0.27), 2) == 2.34
    u = u_star(-1.0)
    assert u > 0
    assert abs(4 * u**3 - 8 * u**2 - u - 2) < 1e-12 * max(1.0, u**3)


def test_infinity_compares_above_floats():
    assert INFINITY > 1e308
    assert not INFINITY < 1e308


def test_xi_values():
    assert xi_of(0.0, 1.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert abs(xi_of(-0.2, eta(-0.2)) ** 2 - 0.328893) < 1e-5
    lam = -0.27
    assert abs(xi_of(lam, u_star(lam)) - (-1 / (4 * lam))) < 1e-2
    with pytest.raises(ValueError):
        xi_of(0.0, 0.0)


def test_eta_hat_values():
    assert eta_hat(0.0) == pytest.approx(math.sqrt(2) / 2, abs=1e-15)
    assert abs(eta_hat(-0.2) ** 2 - 0.328893) < 1e-5
    assert abs(eta_hat(-0.2) - xi_of(-0.2, eta(-0.2))) < 1e-12


def test_complex_pair_fixture():
    e2, e3, e4 = quartic_roots(-9 / 16, 2.0)
    assert e2 == pytest.approx(1.0, abs=1e-12)
    ref = complex(-3, math.sqrt(23)) / 8
    assert abs(e3 - ref) < 1e-12
    assert abs(e4 - ref.conjugate()) < 1e-12


def test_lambda_zero_product():
    e2, e3, e4 = quartic_roots(0.0, 2.0)
    assert 0 < e2 < 2
    assert abs(2 * e2 * e3 * e4 - 1) < 1e-9


def test_roots_against_companion_matrix():
    lam, e1 = -0.5, 3.0
    xi = xi_of(lam, e1)
    ref = np.sort_complex(np.roots([1, 4 * lam, 4 * (lam**2 - xi**2), 0, 1]))
    got = np.sort_complex(np.array([e1, *quartic_roots(lam, e1)], dtype=complex))
    assert np.max(np.abs(ref - got)) < 1e-9
    for r in got:
        assert abs(quartic_Q(r, lam, xi)) < 1e-9


def test_admissibility_gate():
    with pytest.raises(AdmissibilityError):
        quartic_roots(0.0, 1.0)
    with pytest.raises(AdmissibilityError):
        make_parameters(0.3, 0.5)


@settings(max_examples=100, deadline=None)
@given(
    lam=st.floats(min_value=-2.0, max_value=2.0),
    t=st.floats(min_value=1e-4, max_value=30.0),
)
def test_root_identities_random(lam, t):
    e1 = eta(lam) * (1 + t)
    p = make_parameters(lam, e1)
    roots = [p.e1, p.e2, p.e3, p.e4]
    scale = max(1.0, e1**4)
    for r in roots:
        assert abs(p.Q(r)) < 1e-9 * scale
    assert abs(sum(roots) + 4 * lam) < 1e-9 * max(1.0, e1)
    prod = roots[0] * roots[1] * roots[2] * roots[3]
    assert abs(prod - 1) < 1e-9
    assert 0 < p.e2 < p.e1
    if not p.complex_pair:
        assert p.e4 <= p.e3 < 0


@pytest.mark.parametrize("lam", [-1.0, -0.2, 0.0, 0.8])
def test_double_root_collapse(lam):
    et = eta(lam)
    e2, _, _ = quartic_roots(lam, et * (1 + 1e-6))
    assert abs(e2 - et) < 1e-3


@pytest.mark.parametrize("lam", [-1.0, -0.3, 0.0, 1.1])
def test_xi_increasing(lam):
    grid = eta(lam) * (1 + np.geomspace(1e-5, 100, 200))
    assert np.all(np.diff([xi_of(lam, e) for e in grid]) > 0)


def test_classify_examples():
    for e1 in (1.0001, 1.5, 10.0, 500.0):
        if e1 > eta(1.1):
            assert classify(1.1, e1) is Region.NEGATIVE
    assert classify(-0.27, u_star(-0.27)) is Region.EXCEPTIONAL
    (root,) = solve_closure(-0.5, ClosureSpec(3, 8))
    assert root.params.region is Region.POSITIVE


@pytest.mark.parametrize("lam", [-0.3, -0.7, -1.2])
def test_classify_stable_off_locus(lam):
    u = u_star(lam)
    assert classify(lam, u * (1 - 1e-3)) is Region.NEGATIVE
    assert classify(lam, u * (1 + 1e-3)) is Region.POSITIVE
