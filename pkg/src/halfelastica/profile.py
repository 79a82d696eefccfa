"""The mu-invariant: elliptic constants, inverse function h, period, energy and samples.

Phase convention: ``mu(0) = e2``, ``mudot(0) = 0`` and ``mu(omega/2) = e1``.

Quadrature paths use the substitution ``mu = e2 + (e1 - e2) sin^2(phi)``,
under which ``dmu / sqrt((e1 - mu)(mu - e2)) = 2 dphi`` and the remaining
factor ``sqrt(mu^2 + P mu + R)`` of ``sqrt(-Q)`` is smooth and positive.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import IntegrationWarning, quad, solve_ivp

from .elliptic import complete_K, complete_Pi, incomplete_K, incomplete_Pi
from .roots import Parameters, Region

__all__ = [
    "IntegrationError",
    "NumericalError",
    "EllipticData",
    "ProfileSamples",
    "elliptic_constants",
    "h_inverse",
    "period_omega",
    "mu_samples",
    "bending_energy",
    "phase_curve",
    "quad_over_profile",
    "el_rhs",
    "ODE_RTOL",
    "ODE_ATOL",
]

ODE_RTOL = 1e-12
ODE_ATOL = 1e-13
QUAD_RTOL = 1e-13
IMAG_TOL = 1e-8


class IntegrationError(RuntimeError):
    """The ODE integrator failed to meet its tolerance."""


class NumericalError(ArithmeticError):
    """A quantity that must be real or in range came out otherwise."""


def _realify(z, what: str) -> float:
    if isinstance(z, complex):
        if abs(z.imag) > IMAG_TOL * max(1.0, abs(z.real)):
            raise NumericalError(f"{what} has imaginary part {z.imag:.3e}")
        return z.real
    return float(z)


def _pole_offset(p: Parameters) -> float:
    """e2 - 1/(2 xi), accurate to full relative precision near the exceptional locus.

    At t0 = 1/(2 xi) one has Q(t0) = t0^2 (t0 + 2 lam)^2 exactly, so Newton
    on the Taylor expansion of Q about t0 recovers the small offset without
    the cancellation in e2 - t0.
    """
    lam, xi = p.lam, p.xi
    t0 = 1 / (2 * xi)
    eps0 = p.e2 - t0
    c0 = (t0 * (t0 + 2 * lam)) ** 2
    c1 = 4 * t0 * (t0 + lam) * (t0 + 2 * lam) - 4 * xi
    c2 = 6 * t0 * t0 + 12 * lam * t0 + 4 * (lam * lam - xi * xi)
    c3 = 4 * (t0 + lam)
    eps = eps0
    for _ in range(6):
        f = (((eps + c3) * eps + c2) * eps + c1) * eps + c0
        df = ((4 * eps + 3 * c3) * eps + 2 * c2) * eps + c1
        if df == 0:
            break
        step = f / df
        eps -= step
        if abs(step) <= 1e-16 * abs(eps):
            break
    if not math.isfinite(eps) or abs(eps - eps0) > 1e-6 * max(1.0, p.e2):
        return eps0
    return eps


@dataclass(frozen=True)
class EllipticData:
    """Elliptic constants of a parameter point, with exact complements ``x_c = 1 - x``.

    Fields are complex when e3, e4 are a conjugate pair.
    """

    alpha: complex | float
    beta: complex | float
    delta: complex | float
    zeta: complex | float
    zeta_plus: complex | float
    zeta_minus: complex | float
    delta_c: complex | float
    zeta_c: complex | float
    zeta_plus_c: complex | float
    zeta_minus_c: complex | float
    pole_offset: float


def elliptic_constants(p: Parameters) -> EllipticData:
    e1, e2, e3, e4, xi = p.e1, p.e2, p.e3, p.e4, p.xi
    sqrt = cmath.sqrt if p.complex_pair else math.sqrt
    eps = _pole_offset(p)
    d12 = e1 - e2
    d24 = e2 - e4
    d13 = e1 - e3
    d14 = e1 - e4
    return EllipticData(
        alpha=-d12 / d24,
        beta=2 / sqrt(d13 * d24),
        delta=d12 * (e3 - e4) / (d13 * d24),
        zeta=-e4 * d12 / (e1 * d24),
        zeta_plus=-d12 * (2 * e4 * xi - 1) / (d24 * (2 * e1 * xi - 1)),
        zeta_minus=-d12 * (2 * e4 * xi + 1) / (d24 * (2 * e1 * xi + 1)),
        delta_c=d14 * (e2 - e3) / (d13 * d24),
        zeta_c=e2 * d14 / (e1 * d24),
        zeta_plus_c=d14 * 2 * xi * eps / (d24 * (2 * e1 * xi - 1)),
        zeta_minus_c=d14 * (2 * e2 * xi + 1) / (d24 * (2 * e1 * xi + 1)),
        pole_offset=eps,
    )


# ---------------------------------------------------------------------------
# quadrature over [e2, e1]


def _quad(f, a, b, points=None, rtol=QUAD_RTOL):
    # QUADPACK flags roundoff once it reaches machine precision; the value is still good
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", IntegrationWarning)
        val, _ = quad(f, a, b, epsabs=0.0, epsrel=rtol, limit=400, points=points)
    return val


def quad_over_profile(p: Parameters, g, *, upto: float | None = None, points=None, rtol=QUAD_RTOL):
    """Integral of ``g(mu, dmu) / sqrt(-Q(mu))`` over ``[e2, upto]`` (default ``upto = e1``).

    ``g`` receives ``mu`` and ``mu - e2`` (the latter free of cancellation).
    """
    e1, e2 = p.e1, p.e2
    span = e1 - e2
    P = 4 * p.lam + e1 + e2
    R = 1 / (e1 * e2)
    top = math.pi / 2
    if upto is not None:
        if not e2 <= upto <= e1:
            raise ValueError("upper limit outside [e2, e1]")
        top = math.asin(math.sqrt((upto - e2) / span))

    def integrand(phi):
        dm = span * math.sin(phi) ** 2
        mu = e2 + dm
        return g(mu, dm) / math.sqrt(mu * mu + P * mu + R)

    if points is not None:
        points = [x for x in points if 0 < x < top]
    return 2 * _quad(integrand, 0.0, top, points=points or None, rtol=rtol)


# ---------------------------------------------------------------------------
# inverse function h and period


def h_inverse(y: float, p: Parameters, *, method: str = "closed") -> float:
    """Arc length s in [0, omega/2] at which mu(s) = y.

    ``method`` is ``"closed"`` (incomplete elliptic integrals) or
    ``"quadrature"``.
    """
    e1, e2 = p.e1, p.e2
    if not e2 <= y <= e1:
        raise ValueError(f"y={y!r} outside [e2, e1] = [{e2!r}, {e1!r}]")
    if method == "quadrature":
        return quad_over_profile(p, lambda mu, dm: 1 / mu, upto=y)
    if method != "closed":
        raise ValueError(f"unknown method {method!r}")
    ed = elliptic_constants(p)
    if y == e1:
        tail = 0.0
    else:
        x2 = (e2 - p.e4) * (e1 - y) / ((e1 - e2) * (y - p.e4))
        if p.complex_pair:
            phi = cmath.asin(cmath.sqrt(x2))
        else:
            phi = math.asin(min(1.0, math.sqrt(x2)))
        u = incomplete_K(phi, ed.delta)
        pi3 = incomplete_Pi(ed.zeta, phi, ed.delta)
        tail = _realify(
            ed.beta / e1 * (ed.alpha / ed.zeta * u - (ed.alpha - ed.zeta) / ed.zeta * pi3),
            "h tail",
        )
    return period_omega(p) / 2 - tail


def period_omega(p: Parameters, *, method: str = "closed", rtol: float = QUAD_RTOL) -> float:
    """Least period of mu by ``"closed"`` form, ``"quadrature"`` or ``"ode"`` event detection."""
    if method == "closed":
        ed = elliptic_constants(p)
        K = complete_K(ed.delta, delta_c=ed.delta_c)
        Pi = complete_Pi(ed.zeta, ed.delta, zeta_c=ed.zeta_c, delta_c=ed.delta_c)
        om = 2 * ed.beta / p.e1 * (ed.alpha / ed.zeta * K - (ed.alpha - ed.zeta) / ed.zeta * Pi)
        return _realify(om, "omega")
    if method == "quadrature":
        return 2 * quad_over_profile(p, lambda mu, dm: 1 / mu, rtol=rtol)
    if method == "ode":
        return _ode_period(p)
    raise ValueError(f"unknown method {method!r}")


# ---------------------------------------------------------------------------
# ODE


def el_rhs(lam: float):
    """First-order form of the Euler-Lagrange equation in (mu, mudot)."""

    def rhs(s, y):
        mu, v = y[0], y[1]
        return [v, 2 * v * v / mu + mu - mu**5 - 2 * lam * mu**4]

    return rhs


def _ode_period(p: Parameters) -> float:
    guess = period_omega(p, method="quadrature", rtol=1e-8)

    def peak(s, y):
        return y[1]

    peak.direction = -1
    sol = solve_ivp(
        el_rhs(p.lam),
        (0.0, 1.75 * guess),
        [p.e2, 0.0],
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        events=peak,
    )
    if sol.status < 0:
        raise IntegrationError(sol.message)
    hits = sol.t_events[0]
    if len(hits) != 2:
        raise IntegrationError(f"expected two maxima of mu, found {len(hits)}")
    return float(hits[1] - hits[0])


@dataclass(frozen=True)
class ProfileSamples:
    s: np.ndarray
    mu: np.ndarray
    mudot: np.ndarray
    omega: float
    lam: float
    e1: float
    params: Parameters = field(repr=False)

    def conservation_residual(self) -> np.ndarray:
        """Pointwise mudot^2 + mu^2 Q(mu)."""
        return self.mudot**2 + self.mu**2 * self.params.Q(self.mu)


def uniform_grid(span: float, step: float) -> np.ndarray:
    """Uniform grid on [0, span] whose spacing is at most ``step`` and ends exactly at ``span``."""
    if not step > 0:
        raise ValueError("step must be positive")
    n = max(1, int(math.ceil(span / step - 1e-9)))
    return np.linspace(0.0, span, n + 1)


def mu_samples(
    p: Parameters,
    n_periods: float = 1,
    step: float = 1e-2,
    *,
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
    start: float = 0.0,
) -> ProfileSamples:
    """Integrate the Euler-Lagrange equation from ``mu(0) = e2`` over ``n_periods`` periods.

    ``start`` shifts the sampled window to ``[start, start + n_periods*omega]``;
    a negative start integrates backwards first.
    """
    if not n_periods > 0:
        raise ValueError("n_periods must be positive")
    omega = period_omega(p)
    grid = start + uniform_grid(n_periods * omega, step)
    mu, mudot = _integrate_profile(p, grid, rtol=rtol, atol=atol)
    return ProfileSamples(s=grid, mu=mu, mudot=mudot, omega=omega, lam=p.lam, e1=p.e1, params=p)


def _integrate_profile(
    p, grid, *, rtol=ODE_RTOL, atol=ODE_ATOL, extra=None, extra0=(), origin=0.0, mu0=None
):
    """Integrate (mu, mudot[, extra...]) from ``origin`` and evaluate on ``grid``.

    The initial state is ``mu = mu0`` (default e2), ``mudot = 0``.
    ``extra(mu, mudot)`` returns derivatives of additional quadrature states.
    Returns the stacked state rows evaluated on the grid.
    """
    rhs0 = el_rhs(p.lam)
    start = p.e2 if mu0 is None else mu0
    if extra is None:
        rhs = rhs0
        y0 = [start, 0.0]
    else:

        def rhs(s, y):
            return rhs0(s, y) + list(extra(y[0], y[1]))

        y0 = [start, 0.0, *extra0]
    grid = np.asarray(grid, dtype=float)
    out = np.empty((len(y0), grid.size))
    neg = grid < origin
    pos = ~neg
    for mask, sign in ((pos, 1.0), (neg, -1.0)):
        if not mask.any():
            continue
        pts = grid[mask]
        end = pts.max() if sign > 0 else pts.min()
        if end == origin:
            out[:, mask] = np.array(y0, dtype=float)[:, None]
            continue
        order = np.argsort(sign * pts)
        sol = solve_ivp(
            rhs,
            (origin, end),
            y0,
            method="DOP853",
            rtol=rtol,
            atol=atol,
            t_eval=pts[order],
        )
        if sol.status < 0 or sol.y.shape[1] != pts.size:
            raise IntegrationError(sol.message)
        vals = np.empty_like(sol.y)
        vals[:, order] = sol.y
        out[:, mask] = vals
    return out if extra is not None else (out[0], out[1])


# ---------------------------------------------------------------------------
# energy and phase curve


def bending_energy(p: Parameters, n: int = 1, *, method: str = "closed") -> float:
    """Bending energy of n periods of the curve, n (2 beta K(delta) + lam omega)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if method == "closed":
        ed = elliptic_constants(p)
        bk = _realify(ed.beta * complete_K(ed.delta, delta_c=ed.delta_c), "beta K")
        return n * (2 * bk + p.lam * period_omega(p))
    if method == "quadrature":
        j0 = quad_over_profile(p, lambda mu, dm: 1.0)
        return n * (2 * j0 + p.lam * period_omega(p, method="quadrature"))
    raise ValueError(f"unknown method {method!r}")


def phase_curve(p: Parameters, n_points: int = 200) -> np.ndarray:
    """Closed loop of the phase curve y^2 = -x^2 Q(x) over [e2, e1], shape (2*n_points - 1, 2).

    Starts and ends at ``(e2, 0)`` and passes through ``(e1, 0)``.
    """
    if n_points < 2:
        raise ValueError("n_points must be >= 2")
    e1, e2 = p.e1, p.e2
    P = 4 * p.lam + e1 + e2
    R = 1 / (e1 * e2)
    phi = np.linspace(0.0, np.pi / 2, n_points)
    sn = np.sin(phi)
    x = e2 + (e1 - e2) * sn**2
    x[-1] = e1
    negq = (e1 - x) * (x - e2) * (x * x + P * x + R)
    y = x * np.sqrt(np.clip(negq, 0.0, None))
    upper = np.column_stack([x, y])
    lower = np.column_stack([x[::-1], -y[::-1]])[1:]
    return np.vstack([upper, lower])
