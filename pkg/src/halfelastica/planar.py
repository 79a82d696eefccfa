"""Planar 1/2-elasticae: translation period, displacement and the non-convex branch function.

In the plane the curvature ``mu^2`` of a critical curve obeys

    mudot^2 + mu^4 (mu^2 - (e1 + e2) mu + e1 e2) = 0,

which fixes the multiplier ``lam = -(e1 + e2)/4`` and the level
``d = (e1 - e2)^2 / 16``.  Convex curves (``e1 > e2 > 0``) have periodic
curvature but translate by a nonzero vector every period, so they never close.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .profile import ODE_ATOL, ODE_RTOL, IntegrationError, _quad, uniform_grid

__all__ = [
    "PlanarDomainError",
    "PlanarParams",
    "planar_period",
    "planar_half_integral",
    "planar_displacement",
    "planar_curve",
    "planar_period_ode",
    "planar_h_branch",
    "planar_h_quadrature",
]


class PlanarDomainError(ValueError):
    """Roots outside the domain of the requested planar quantity."""


@dataclass(frozen=True)
class PlanarParams:
    e1: float
    e2: float
    lam: float
    d: float

    @classmethod
    def from_roots(cls, e1: float, e2: float) -> "PlanarParams":
        e1, e2 = float(e1), float(e2)
        if not e1 > e2:
            raise PlanarDomainError(f"need e1 > e2, got e1={e1!r}, e2={e2!r}")
        return cls(e1=e1, e2=e2, lam=-(e1 + e2) / 4, d=(e1 - e2) ** 2 / 16)

    @property
    def convex(self) -> bool:
        return self.e2 > 0


def _convex(e1: float, e2: float) -> None:
    if not e1 > e2:
        raise PlanarDomainError(f"need e1 > e2, got e1={e1!r}, e2={e2!r}")
    if not e2 > 0:
        raise PlanarDomainError(f"convex case needs e2 > 0, got {e2!r}")


def planar_period(e1: float, e2: float, *, method: str = "closed") -> float:
    """Least period of the planar curvature, ``pi (e1 + e2) / (e1 e2)^(3/2)``."""
    _convex(e1, e2)
    if method == "closed":
        return math.pi * (e1 + e2) / (e1 * e2) ** 1.5
    if method == "quadrature":
        # mu = e2 + (e1 - e2) sin^2 phi removes the endpoint singularities
        span = e1 - e2
        return 4 * _quad(lambda t: 1 / (e2 + span * math.sin(t) ** 2) ** 2, 0.0, math.pi / 2)
    raise ValueError(f"unknown method {method!r}")


def planar_half_integral(e1: float, e2: float, *, method: str = "closed") -> float:
    """Half the integral of mu over one period, ``pi / sqrt(e1 e2)``."""
    _convex(e1, e2)
    if method == "closed":
        return math.pi / math.sqrt(e1 * e2)
    if method == "quadrature":
        span = e1 - e2
        return 2 * _quad(lambda t: 1 / (e2 + span * math.sin(t) ** 2), 0.0, math.pi / 2)
    raise ValueError(f"unknown method {method!r}")


def planar_displacement(e1: float, e2: float) -> np.ndarray:
    """gamma(s + omega) - gamma(s) for the unit-speed normalization."""
    if e1 == e2:
        return np.zeros(2)
    _convex(e1, e2)
    return np.array([-math.pi * (e1 - e2) / (e1 * e2) ** 1.5, 0.0])


def _rhs(e1: float, e2: float):
    a, b = e1 + e2, e1 * e2

    def rhs(s, y):
        mu, v = y[0], y[1]
        q = mu * mu - a * mu + b
        return [v, -0.5 * mu**3 * (4 * q + mu * (2 * mu - a)), mu]

    return rhs


def planar_curve(
    params: PlanarParams,
    span: float,
    step: float = 1e-2,
    *,
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
):
    """Samples ``(s, gamma)`` of the convex planar curve on ``[0, span]``.

    ``gamma = d^(-1/2) (lam s + (1/2) int mu, -1 / (2 mu))`` with ``mu(0) = e2``.
    """
    if not params.convex:
        raise PlanarDomainError("planar_curve needs e2 > 0")
    s = uniform_grid(span, step)
    sol = solve_ivp(
        _rhs(params.e1, params.e2),
        (0.0, s[-1]),
        [params.e2, 0.0, 0.0],
        method="DOP853",
        rtol=rtol,
        atol=atol,
        t_eval=s,
    )
    if sol.status < 0 or sol.t.size != s.size:
        raise IntegrationError(sol.message)
    mu, _, imu = sol.y
    scale = 1 / math.sqrt(params.d)
    gamma = scale * np.column_stack([params.lam * s + 0.5 * imu, -0.5 / mu])
    return s, gamma


def planar_period_ode(e1: float, e2: float) -> float:
    """Period of mu detected as the spacing of its two first maxima."""
    _convex(e1, e2)
    guess = planar_period(e1, e2)

    def peak(s, y):
        return y[1]

    peak.direction = -1
    sol = solve_ivp(
        _rhs(e1, e2),
        (0.0, 1.75 * guess),
        [e2, 0.0, 0.0],
        method="DOP853",
        rtol=ODE_RTOL,
        atol=ODE_ATOL,
        events=peak,
    )
    hits = sol.t_events[0]
    if sol.status < 0 or len(hits) != 2:
        raise IntegrationError("could not detect two maxima of mu")
    return float(hits[1] - hits[0])


def _branch_domain(m: float, e1: float, e2: float) -> None:
    if not e1 > 0 > e2:
        raise PlanarDomainError(f"branch function needs e1 > 0 > e2, got e1={e1!r}, e2={e2!r}")
    if not 0 < m <= e1:
        raise PlanarDomainError(f"m={m!r} outside (0, e1]")


def planar_h_branch(m: float, e1: float, e2: float, sign: str = "+") -> float:
    """Inverse branches h+ (negative, rising side) and h- (positive, falling side) of mu.

    Closed form of the integral of ``1 / (mu^2 sqrt(-mu^2 + (e1 + e2) mu - e1 e2))``
    from e1 to m, with sign ``-`` flipping it.
    """
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    _branch_domain(m, e1, e2)
    if m == e1:
        return 0.0
    a = abs(e2)
    root = math.sqrt(e1 * a * (e1 - m) * (m - e2))
    tail = (e1 + e2) * m * math.atanh(math.sqrt(a * (e1 - m) / (e1 * (m - e2))))
    value = (root - tail) / ((e1 * a) ** 1.5 * m)
    return -value if sign == "+" else value


def planar_h_quadrature(m: float, e1: float, e2: float, sign: str = "+") -> float:
    """The same branch function by direct quadrature."""
    if sign not in ("+", "-"):
        raise ValueError("sign must be '+' or '-'")
    _branch_domain(m, e1, e2)
    # mu = e1 - (e1 - e2) sin^2 t maps [0, t_m] onto [m, e1]
    span = e1 - e2
    top = math.asin(math.sqrt((e1 - m) / span))
    val = 2 * _quad(lambda t: 1 / (e1 - span * math.sin(t) ** 2) ** 2, 0.0, top)
    return -val if sign == "+" else val
