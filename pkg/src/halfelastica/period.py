"""Jump of the angular function, its regularization and the closure condition.

The jump ``Psi`` is the increase of the angular function over one period of
mu.  It is discontinuous across the exceptional locus (by 2 pi); the
regularized jump ``psi_hat`` adds pi on the locus and reduces mod 2 pi,
which makes it continuous.  A curve closes iff ``psi_hat = 2 pi m / n``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .elliptic import complete_K, complete_Pi
from .profile import _quad, _realify, elliptic_constants, quad_over_profile
from .roots import (
    AdmissibilityError,
    Parameters,
    Region,
    eta,
    make_parameters,
    u_star,
)

__all__ = [
    "ExceptionalPathError",
    "InvalidSpec",
    "ClosureSpec",
    "ClosureResult",
    "p_of_lambda",
    "psi_quadrature",
    "psi_closed_form",
    "psi",
    "psi_hat",
    "admissible_interval",
    "solve_closure",
    "solve_exceptional",
    "period_map_table",
    "scan_grid",
    "DEFAULT_SCAN",
    "CLOSURE_TOL",
]

TWO_PI = 2 * math.pi
DEFAULT_SCAN = (1e3, 400)
CLOSURE_TOL = 1e-10


class ExceptionalPathError(ValueError):
    """The raw jump integral was requested on the exceptional locus."""


class InvalidSpec(ValueError):
    """A characteristic number that is not a reduced fraction in (0, 1)."""


@dataclass(frozen=True)
class ClosureSpec:
    m: int
    n: int

    def __post_init__(self):
        if not (isinstance(self.m, int) and isinstance(self.n, int)):
            raise InvalidSpec("m and n must be integers")
        if not 0 < self.m < self.n:
            raise InvalidSpec(f"need 0 < m < n, got m={self.m}, n={self.n}")
        if math.gcd(self.m, self.n) != 1:
            raise InvalidSpec(f"m={self.m} and n={self.n} are not coprime")

    @property
    def q(self) -> Fraction:
        return Fraction(self.m, self.n)

    @property
    def target(self) -> float:
        return TWO_PI * self.m / self.n


@dataclass(frozen=True)
class ClosureResult:
    params: Parameters
    spec: ClosureSpec
    psi_hat: float
    residual: float
    bracket: tuple[float, float]


def p_of_lambda(lam: float) -> float:
    """Limit of Psi / (2 pi) at the critical circle, a value in (-1, -1/sqrt 3)."""
    e4 = eta(lam) ** 4
    return -math.sqrt((1 + e4) / (3 + e4))


def p_of_lambda_alt(lam: float) -> float:
    """Same function written through lam * eta^3."""
    t = lam * eta(lam) ** 3
    return -math.sqrt((1 - t) / (2 - t))


def admissible_interval(lam: float) -> tuple[float, float]:
    """Open interval (1 + p(lam), 1/2) of characteristic numbers guaranteed to close."""
    return (1 + p_of_lambda(lam), 0.5)


# ---------------------------------------------------------------------------
# jump


def psi_quadrature(p: Parameters, *, rtol: float = 1e-13) -> float:
    """Jump by direct quadrature of the angular integrand over one period.

    Uses mu (mu + 2 lam) / (1 - 4 xi^2 mu^2) = A + B/(1 - 2 xi mu) + C/(1 + 2 xi mu)
    with the near-singular denominator written relative to the pole.
    """
    if p.region is Region.EXCEPTIONAL:
        raise ExceptionalPathError("the jump integral is not defined on the exceptional locus")
    xi, lam = p.xi, p.lam
    e1, e2 = p.e1, p.e2
    eps = elliptic_constants(p).pole_offset
    A = -1 / (4 * xi * xi)
    B = (1 + 4 * lam * xi) / (8 * xi * xi)
    C = (1 - 4 * lam * xi) / (8 * xi * xi)
    regular = quad_over_profile(p, lambda mu, dm: A + C / (1 + 2 * xi * mu), rtol=rtol)

    # B / (1 - 2 xi mu) = -B / (2 xi (eps + dm)) peaks sharply when eps is small;
    # subtract its value at mu = e2 and integrate that part exactly.
    span = e1 - e2
    P = 4 * lam + e1 + e2
    R = 1 / (e1 * e2)
    w0 = 1 / math.sqrt(e2 * e2 + P * e2 + R)

    def rest(phi):
        dm = span * math.sin(phi) ** 2
        mu = e2 + dm
        return (1 / math.sqrt(mu * mu + P * mu + R) - w0) / (eps + dm)

    points = None
    if 0 < eps < span:
        pc = math.asin(math.sqrt(eps / span))
        points = [pc * f for f in (0.1, 0.3, 1.0, 3.0, 10.0, 30.0, 100.0) if pc * f < math.pi / 2]
    val = _quad(rest, 0.0, math.pi / 2, points=points, rtol=rtol)
    exact = w0 * math.pi / (2 * math.sqrt(eps * (eps + span)))
    singular = -B / xi * (exact + val)
    return 4 * xi * (regular + singular)


def psi_closed_form(p: Parameters) -> float:
    """Jump through complete elliptic integrals of the first and third kind.

    The third-kind term with the pole at 1/(2 xi) is omitted on the
    exceptional locus, where its coefficient vanishes.
    """
    ed = elliptic_constants(p)
    e1, xi, lam = p.e1, p.xi, p.lam
    al, be, zp, zm = ed.alpha, ed.beta, ed.zeta_plus, ed.zeta_minus
    K = complete_K(ed.delta, delta_c=ed.delta_c)
    a_minus = 2 * e1 * xi - 1
    a_plus = 2 * e1 * xi + 1
    defect = 1 + 4 * lam * xi
    chi = p.chi
    first = (
        be
        / (4 * math.pi * xi)
        * (-2 + al * (-defect / (zp * a_minus) * (1 - chi) + (1 - 4 * lam * xi) / (zm * a_plus)))
        * K
    )
    second = 0.0
    if not chi:
        pi_plus = complete_Pi(zp, ed.delta, zeta_c=ed.zeta_plus_c, delta_c=ed.delta_c)
        second = be * (al - zp) * defect / (4 * math.pi * zp * xi * a_minus) * pi_plus
    pi_minus = complete_Pi(zm, ed.delta, zeta_c=ed.zeta_minus_c, delta_c=ed.delta_c)
    third = be * (al - zm) * (4 * lam * xi - 1) / (4 * math.pi * zm * xi * a_plus) * pi_minus
    return _realify(TWO_PI * (first + second + third), "Psi")


def psi(p: Parameters, *, method: str = "closed") -> float:
    if method == "closed":
        return psi_closed_form(p)
    if method == "quadrature":
        return psi_quadrature(p)
    raise ValueError(f"unknown method {method!r}")


def psi_hat(p: Parameters, *, method: str = "closed") -> float:
    """Regularized jump in [0, 2 pi): Psi mod 2 pi off the locus, Psi + pi on it.

    On the locus the closed form is always used.
    """
    if p.region is Region.EXCEPTIONAL:
        value = psi_closed_form(p) + math.pi
    else:
        value = psi(p, method=method)
    return value % TWO_PI


# ---------------------------------------------------------------------------
# closure


def scan_grid(lam: float, e1_max: float = DEFAULT_SCAN[0], n: int = DEFAULT_SCAN[1]) -> np.ndarray:
    """Abscissae log-spaced in e1 - eta from eta*1e-6 up to e1_max."""
    et = eta(lam)
    if not e1_max > et:
        raise AdmissibilityError(f"scan limit {e1_max!r} must exceed eta={et!r}")
    if n < 2:
        raise ValueError("need at least two scan points")
    offsets = np.geomspace(et * 1e-6, e1_max - et, n)
    return et + offsets


def _refine(f, a, b, fa, fb, tol):
    """Bracketed root of f with a bisection fallback when Brent stalls on the residual."""
    x = brentq(f, a, b, xtol=1e-15 * max(abs(a), abs(b)), rtol=8.9e-16, maxiter=200)
    if abs(f(x)) < tol:
        return x
    lo, hi, flo = a, b, fa
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if abs(fm) < tol or hi - lo <= 4e-16 * abs(mid):
            return mid
        if (fm < 0) == (flo < 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def solve_closure(
    lam: float,
    spec: ClosureSpec,
    scan: tuple[float, int] = DEFAULT_SCAN,
    *,
    tol: float = CLOSURE_TOL,
    method: str = "closed",
) -> list[ClosureResult]:
    """All e1 in the scan range where psi_hat equals 2 pi m / n, ascending in e1."""
    target = spec.target

    def g(e1):
        return psi_hat(make_parameters(lam, e1), method=method) - target

    grid = scan_grid(lam, *scan)
    vals = np.array([g(e) for e in grid])
    results = []
    for i in range(len(grid) - 1):
        a, b, fa, fb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if fa == 0:
            root = a
        elif fa * fb < 0:
            # a jump of psi_hat across the 0/2pi seam is not a root
            if abs(fa - fb) > math.pi:
                continue
            root = _refine(g, a, b, fa, fb, tol)
        else:
            continue
        params = make_parameters(lam, root)
        ph = psi_hat(params, method=method)
        results.append(
            ClosureResult(
                params=params,
                spec=spec,
                psi_hat=ph,
                residual=abs(ph - target),
                bracket=(float(a), float(b)),
            )
        )
    return results


def solve_exceptional(
    spec: ClosureSpec,
    lam_range: tuple[float, float] = (-3.0, -1e-3),
    n_scan: int = 200,
    *,
    tol: float = CLOSURE_TOL,
) -> list[ClosureResult]:
    """Multipliers lam < 0 for which the exceptional curve e1 = u_star(lam) closes with ``spec``."""
    target = spec.target
    lo, hi = lam_range
    if not lo < hi < 0:
        raise ValueError("lam_range must lie in lam < 0")

    def g(lam):
        return psi_hat(make_parameters(lam, u_star(lam)), method="closed") - target

    grid = np.linspace(lo, hi, n_scan)
    vals = np.array([g(x) for x in grid])
    out = []
    for i in range(n_scan - 1):
        a, b, fa, fb = grid[i], grid[i + 1], vals[i], vals[i + 1]
        if fa * fb < 0 and abs(fa - fb) < math.pi:
            lam = _refine(g, a, b, fa, fb, tol)
            params = make_parameters(lam, u_star(lam))
            ph = psi_hat(params)
            out.append(ClosureResult(params, spec, ph, abs(ph - target), (float(a), float(b))))
    return out


# ---------------------------------------------------------------------------
# tables


def period_map_table(lam: float, grid) -> list[tuple[float, float, float, str]]:
    """Rows (e1, psi, psi_hat, region) for export.

    On the exceptional locus ``psi`` is the closed form with the singular
    term omitted (the midpoint of the two one-sided limits).
    """
    rows = []
    for e1 in np.asarray(grid, dtype=float):
        p = make_parameters(lam, float(e1))
        ps = psi_closed_form(p)
        ph = (ps + (math.pi if p.region is Region.EXCEPTIONAL else 0.0)) % TWO_PI
        rows.append((float(e1), ps, ph, p.region.value))
    return rows
