import math

import numpy as np
import pytest

import oracles
from halfelastica.period import (
    ClosureSpec,
    ExceptionalPathError,
    InvalidSpec,
    admissible_interval,
    p_of_lambda,
    p_of_lambda_alt,
    period_map_table,
    psi,
    psi_closed_form,
    psi_hat,
    psi_quadrature,
    scan_grid,
    solve_closure,
    solve_exceptional,
)
from halfelastica.roots import Region, eta, make_parameters, u_star

TWO_PI = 2 * math.pi
LAMS = (-1.0, -0.5, 0.0, 0.5, 1.1)


def test_p_values():
    assert p_of_lambda(0.0) == pytest.approx(-1 / math.sqrt(2), abs=1e-15)
    assert abs(p_of_lambda(1e3) - (-1 / math.sqrt(3))) < 1e-2
    ps = [p_of_lambda(l) for l in (-2, -1, 0, 1, 2)]
    assert np.all(np.diff(ps) > 0)
    for lam in np.linspace(-3, 3, 25):
        assert abs(p_of_lambda(lam) - p_of_lambda_alt(lam)) < 1e-12
        assert -1 < p_of_lambda(lam) < -1 / math.sqrt(3)


def test_admissible_interval():
    lo, hi = admissible_interval(0.0)
    assert lo == pytest.approx(1 - 1 / math.sqrt(2), abs=1e-15) and hi == 0.5
    lo, hi = admissible_interval(1.1)
    assert lo < 2 / 5 < hi
    lo, hi = admissible_interval(-0.5)
    assert lo < 3 / 8 < hi


def _off_locus_grid():
    pts = []
    for lam in LAMS:
        et = eta(lam)
        cands = [et * 1.01, et * 1.2, et * 2, et * 5, 40.0]
        u = u_star(lam)
        for e1 in cands:
            if lam < 0 and abs(e1 / u - 1) < 1e-2:
                e1 *= 1.05
            pts.append((lam, e1))
    return pts


@pytest.mark.parametrize("lam,e1", _off_locus_grid())
def test_closed_form_vs_quadrature(lam, e1):
    p = make_parameters(lam, e1)
    assert p.region is not Region.EXCEPTIONAL
    a = psi_closed_form(p)
    assert abs(a - psi_quadrature(p)) < 1e-8
    assert abs(a - oracles.MpProfile(lam, e1).psi()) < 1e-8


def test_closed_form_reference_point():
    p = make_parameters(-0.5, 3.0)
    assert abs(psi_closed_form(p) - psi_quadrature(p)) < 1e-8


@pytest.mark.parametrize("lam", LAMS)
def test_limit_at_circle(lam):
    p = make_parameters(lam, eta(lam) * (1 + 1e-4))
    assert abs(psi(p) - TWO_PI * p_of_lambda(lam)) < 1e-2
    assert abs(psi_quadrature(p) - TWO_PI * p_of_lambda(lam)) < 1e-2


@pytest.mark.parametrize("lam", LAMS)
def test_limit_at_infinity(lam):
    p = make_parameters(lam, 1e3)
    want = math.pi if lam < 0 else -math.pi
    assert abs(psi_quadrature(p) - want) < 0.05
    assert abs(psi(p) - want) < 0.05


def test_sign_pattern_by_region():
    # theta decreases over a period for negative type, increases for positive type
    assert psi(make_parameters(1.1, 3.0)) < 0
    assert psi(make_parameters(-1.0, 1.5 * u_star(-1.0))) > 0


def test_exceptional_point():
    lam = -0.27
    p = make_parameters(lam, u_star(lam))
    assert p.region is Region.EXCEPTIONAL and p.chi == 1
    assert math.isfinite(psi_closed_form(p))
    with pytest.raises(ExceptionalPathError):
        psi_quadrature(p)


@pytest.mark.parametrize("e1", [1.0001, 1.5, 3.0, 100.0])
def test_lambda_zero_branch(e1):
    p = make_parameters(0.0, e1)
    assert abs(psi_closed_form(p) - psi_quadrature(p)) < 1e-8


def test_exceptional_two_thirds_at_minus_027():
    hits = [r for r in solve_exceptional(ClosureSpec(2, 3)) if round(r.params.lam, 2) == -0.27]
    assert hits, "no exceptional curve near lam = -0.27 with psi_hat = 4 pi / 3"
    assert abs(hits[0].psi_hat - 4 * math.pi / 3) < 1e-10


def test_exceptional_one_third_at_minus_027():
    hits = [r for r in solve_exceptional(ClosureSpec(1, 3)) if round(r.params.lam, 2) == -0.27]
    assert len(hits) == 1
    p = hits[0].params
    assert abs(p.exceptional_defect) < 1e-6
    assert abs(hits[0].psi_hat - TWO_PI / 3) < 1e-10


def test_psi_hat_is_psi_mod_two_pi_off_locus():
    for lam, e1 in _off_locus_grid():
        p = make_parameters(lam, e1)
        d = (psi_hat(p) - psi(p)) / TWO_PI
        assert abs(d - round(d)) < 1e-12
        assert 0 <= psi_hat(p) < TWO_PI


@pytest.mark.parametrize("lam", [-0.45, -0.27, -1.0])
def test_psi_hat_continuous_across_locus(lam):
    u = u_star(lam)
    below = psi_hat(make_parameters(lam, u - 1e-6))
    above = psi_hat(make_parameters(lam, u + 1e-6))
    on = psi_hat(make_parameters(lam, u))
    assert abs(below - above) < 1e-3
    assert abs(on - below) < 1e-3
    # the raw jump itself is discontinuous by 2 pi
    raw = psi(make_parameters(lam, u + 1e-6)) - psi(make_parameters(lam, u - 1e-6))
    assert abs(abs(raw) - TWO_PI) < 1e-2


@pytest.mark.parametrize("lam", LAMS + (-2.0, 3.0))
def test_range_containment_on_scan_grid(lam):
    lo = TWO_PI * (1 + p_of_lambda(lam))
    for e1 in scan_grid(lam):
        v = psi_hat(make_parameters(lam, float(e1)))
        assert lo < v < math.pi


def test_solve_closure_negative_case():
    roots = solve_closure(1.1, ClosureSpec(2, 5))
    assert len(roots) == 1
    r = roots[0]
    assert r.residual < 1e-10
    assert r.params.region is Region.NEGATIVE
    assert r.bracket[0] <= r.params.e1 <= r.bracket[1]


def test_solve_closure_positive_case():
    roots = solve_closure(-0.5, ClosureSpec(3, 11))
    assert roots and all(r.params.region is Region.POSITIVE for r in roots)


def test_solve_closure_not_found():
    assert solve_closure(0.0, ClosureSpec(1, 4)) == []


@pytest.mark.parametrize("m,n", [(2, 4), (0, 3), (3, 3), (5, 3), (-1, 4)])
def test_invalid_spec(m, n):
    with pytest.raises(InvalidSpec):
        ClosureSpec(m, n)


@pytest.mark.parametrize(
    "lam,m,n", [(1.1, 2, 5), (-0.5, 3, 8), (-0.5, 3, 11), (-0.5, 2, 9), (0.1, 1, 3), (-1.1, 1, 3)]
)
def test_closure_residual_and_alternate_path(lam, m, n):
    spec = ClosureSpec(m, n)
    for r in solve_closure(lam, spec):
        assert r.residual < 1e-10
        alt = abs(psi_hat(r.params, method="quadrature") - spec.target)
        assert abs(alt - r.residual) < 1e-7


def test_period_map_table_limits_and_flip():
    lam = -0.45
    et = eta(lam)
    grid = et + np.geomspace(et * 1e-4, 1e3 - et, 120)
    rows = period_map_table(lam, grid)
    assert len(rows) == 120
    assert not np.any(np.isnan(np.array([r[:3] for r in rows])))
    assert abs(rows[0][1] - TWO_PI * p_of_lambda(lam)) < 1e-2
    assert abs(rows[-1][1] - math.pi) < 0.05
    regions = [r[3] for r in rows]
    flips = sum(a != b for a, b in zip(regions, regions[1:]))
    assert flips == 1
    assert regions[0] == "NegativeType" and regions[-1] == "PositiveType"


def test_period_map_table_positive_lambda_limit():
    lam = 0.5
    et = eta(lam)
    rows = period_map_table(lam, [et * (1 + 1e-4), 1e3])
    assert abs(rows[0][1] - TWO_PI * p_of_lambda(lam)) < 1e-2
    assert abs(rows[1][1] + math.pi) < 0.05


def test_period_map_table_resolution_independent():
    lam = -0.5
    coarse = np.linspace(1.5, 6.0, 10)
    fine = np.linspace(1.5, 6.0, 19)
    a = {r[0]: r for r in period_map_table(lam, coarse)}
    b = {r[0]: r for r in period_map_table(lam, fine)}
    shared = sorted(set(a) & set(b))
    assert len(shared) == 10
    for x in shared:
        assert abs(a[x][1] - b[x][1]) < 1e-8 and abs(a[x][2] - b[x][2]) < 1e-8
