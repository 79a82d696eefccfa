import math

import numpy as np
import pytest

import oracles
from halfelastica.period import ClosureSpec, solve_closure
from halfelastica.profile import (
    bending_energy,
    elliptic_constants,
    h_inverse,
    mu_samples,
    period_omega,
    phase_curve,
)
from halfelastica.elliptic import complete_K
from halfelastica.roots import Region, e1_from_xi, eta, make_parameters, u_star


def _grid_points():
    pts = [(-9 / 16, 2.0)]
    for lam in (-1.0, -0.5, -0.27):
        et, u = eta(lam), u_star(lam)
        pts += [(lam, et * 1.001), (lam, 0.5 * (et + u)), (lam, u), (lam, 1.5 * u)]
    for lam in (0.0, 1.1):
        et = eta(lam)
        pts += [(lam, et * 1.001), (lam, et * 1.3), (lam, et * 2), (lam, 10.0)]
    pts += [(-0.5, 10.0), (0.5, eta(0.5) * 1.01), (0.5, 3.0), (-2.0, 20.0)]
    return pts


GRID = _grid_points()


def test_grid_covers_all_regions():
    assert len(GRID) == 25
    regions = {make_parameters(l, e).region for l, e in GRID}
    assert regions == set(Region)
    assert make_parameters(-9 / 16, 2.0).complex_pair


@pytest.mark.parametrize("lam,e1", GRID)
def test_period_closed_vs_quadrature_and_ode(lam, e1):
    p = make_parameters(lam, e1)
    om = period_omega(p)
    assert abs(om - oracles.MpProfile(lam, e1).omega()) / om < 1e-8
    assert abs(om - period_omega(p, method="quadrature")) / om < 1e-8
    assert abs(om - period_omega(p, method="ode")) / om < 1e-6


def test_period_quadrature_refinement():
    p = make_parameters(-0.5, 3.0)
    a = period_omega(p, method="quadrature", rtol=1e-8)
    b = period_omega(p, method="quadrature", rtol=1e-10)
    assert abs(a - b) < 1e-7


@pytest.mark.parametrize("lam", [-1.0, 0.0, 0.7])
def test_period_near_circle_is_linearized_period(lam):
    et = eta(lam)
    p = make_parameters(lam, et * (1 + 1e-4))
    # linearizing mu'' = 2 mu'^2/mu + mu - mu^5 - 2 lam mu^4 at the circle
    w2 = 4 - 2 * lam * et**3
    lin = 2 * math.pi / math.sqrt(w2)
    assert abs(period_omega(p) - lin) / lin < 1e-3


def test_elliptic_constants_complex_case():
    p = make_parameters(-9 / 16, 2.0)
    ed = elliptic_constants(p)
    assert any(isinstance(v, complex) and abs(v.imag) > 1e-6 for v in (ed.alpha, ed.beta, ed.delta))
    om = period_omega(p)
    assert isinstance(om, float) and om > 0


def test_alpha_vanishes_at_circle():
    lam = -0.4
    ed = elliptic_constants(make_parameters(lam, eta(lam) * (1 + 1e-9)))
    assert abs(ed.alpha) < 1e-3


def test_delta_in_unit_interval_for_closure_root():
    (root,) = solve_closure(-0.5, ClosureSpec(3, 8))
    ed = elliptic_constants(root.params)
    assert not root.params.complex_pair
    assert 0 < ed.delta < 1
    assert ed.beta > 0


def test_h_inverse_endpoints_and_oracle():
    p = make_parameters(-9 / 16, 2.0)
    assert h_inverse(p.e2, p) == pytest.approx(0.0, abs=1e-12)
    assert h_inverse(p.e1, p) == pytest.approx(period_omega(p) / 2, rel=1e-14)
    mid = 0.5 * (p.e1 + p.e2)
    assert abs(h_inverse(mid, p) - oracles.MpProfile(-9 / 16, 2.0).h(mid)) < 1e-8
    with pytest.raises(ValueError):
        h_inverse(p.e1 + 0.1, p)


def _whole_period_samples(p, n):
    om = period_omega(p)
    return mu_samples(p, n, step=om / 400)


def test_mu_at_half_period():
    p = make_parameters(1.1, 1.46)
    prof = _whole_period_samples(p, 1)
    i = np.argmin(np.abs(prof.s - prof.omega / 2))
    assert prof.s[i] == pytest.approx(prof.omega / 2, rel=1e-12)
    assert abs(prof.mu[i] - p.e1) < 1e-7
    assert prof.mu[0] == p.e2 and prof.mudot[0] == 0.0


def test_mu_even():
    p = make_parameters(-0.5, 3.0)
    om = period_omega(p)
    prof = mu_samples(p, 1, step=om / 400, start=-om / 2)
    assert np.max(np.abs(prof.mu - prof.mu[::-1])) < 1e-8


def test_h_inverse_round_trip_along_samples():
    p = make_parameters(1.1, 1.46)
    prof = _whole_period_samples(p, 1)
    inner = (prof.s > 0) & (prof.s < prof.omega / 2)
    worst = max(abs(h_inverse(float(m), p) - s) for s, m in zip(prof.s[inner][::10], prof.mu[inner][::10]))
    assert worst < 1e-6


@pytest.mark.parametrize("lam,e1", GRID)
def test_conservation_over_ten_periods(lam, e1):
    p = make_parameters(lam, e1)
    prof = _whole_period_samples(p, 10)
    res = np.abs(prof.conservation_residual())
    assert res.max() < 1e-8 * max(1.0, e1**6)
    one = res[prof.s <= prof.omega].max()
    assert res.max() <= 10 * one
    assert abs(prof.mu.min() - p.e2) < 1e-6
    assert abs(prof.mu.max() - p.e1) < 1e-6


@pytest.mark.parametrize("lam,e1", GRID)
def test_energy_closed_vs_quadrature(lam, e1):
    p = make_parameters(lam, e1)
    b = bending_energy(p)
    assert abs(b - oracles.MpProfile(lam, e1).energy()) / abs(b) < 1e-8
    assert abs(b - bending_energy(p, method="quadrature")) / abs(b) < 1e-8


def test_energy_linear_in_n():
    p = make_parameters(-0.5, 3.0)
    assert bending_energy(p, 3) == pytest.approx(3 * bending_energy(p, 1), rel=1e-15)


def test_energy_lambda_zero():
    p = make_parameters(0.0, 2.0)
    ed = elliptic_constants(p)
    want = 2 * 2 * ed.beta * complete_K(ed.delta)
    assert bending_energy(p, 2) == pytest.approx(want, rel=1e-14)
    assert want > 0


def test_energy_closure_parameters():
    (root,) = solve_closure(-0.5, ClosureSpec(3, 8))
    p = root.params
    ref = oracles.MpProfile(p.lam, p.e1).energy(8)
    assert abs(bending_energy(p, 8) - ref) / abs(ref) < 1e-8


def test_phase_curve():
    lam = -0.2
    e1 = e1_from_xi(lam, math.sqrt(0.869759))
    p = make_parameters(lam, e1)
    pts = phase_curve(p, 300)
    x, y = pts[:, 0], pts[:, 1]
    assert np.allclose(pts[0], [p.e2, 0.0], atol=1e-14)
    assert np.allclose(pts[-1], [p.e2, 0.0], atol=1e-14)
    assert np.any(np.all(np.isclose(pts, [p.e1, 0.0], atol=1e-14), axis=1))
    assert x.min() == pytest.approx(p.e2) and x.max() == pytest.approx(p.e1)
    assert np.all(x > 0)
    assert np.max(np.abs(y**2 + x**2 * p.Q(x))) < 1e-10
    assert np.any(y > 0) and np.any(y < 0)
