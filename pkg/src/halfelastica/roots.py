"""Algebraic equations of the model: critical circle, exceptional cubic and the quartic Q.

Admissible parameters are pairs ``(lam, e1)`` with ``e1 > eta(lam)``.  From
them follow the momentum length ``xi`` and the remaining roots of

    Q(t) = t^4 + 4 lam t^3 + 4 (lam^2 - xi^2) t^2 + 1.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

from scipy.optimize import brentq

__all__ = [
    "AdmissibilityError",
    "Region",
    "Infinity",
    "INFINITY",
    "Parameters",
    "eta",
    "u_star",
    "xi_of",
    "quartic_Q",
    "quartic_roots",
    "classify",
    "eta_hat",
    "make_parameters",
    "DEFAULT_REGION_TOL",
    "e1_from_xi",
]

DEFAULT_REGION_TOL = 1e-9


class AdmissibilityError(ValueError):
    """(lam, e1) lies outside the admissible domain e1 > eta(lam)."""


class Region(str, enum.Enum):
    NEGATIVE = "NegativeType"
    EXCEPTIONAL = "Exceptional"
    POSITIVE = "PositiveType"


class Infinity:
    """Tag returned by :func:`u_star` when the exceptional cubic has no positive root."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Infinity"

    def __float__(self) -> float:
        return math.inf

    def __gt__(self, other) -> bool:
        return not isinstance(other, Infinity)

    def __ge__(self, other) -> bool:
        return True

    def __lt__(self, other) -> bool:
        return False

    def __le__(self, other) -> bool:
        return isinstance(other, Infinity)


INFINITY = Infinity()


def _polish(f, df, x, iters=3):
    for _ in range(iters):
        d = df(x)
        if d == 0:
            break
        step = f(x) / d
        x = x - step
        if abs(step) <= 1e-17 * max(1.0, abs(x)):
            break
    return x


def eta(lam: float) -> float:
    """Positive root of mu^4 + 2 lam mu^3 - 1 (curvature root of the critical circle)."""
    lam = float(lam)
    f = lambda m: m**3 * (m + 2 * lam) - 1
    df = lambda m: 4 * m**3 + 6 * lam * m**2
    # f(0) = -1 and f(max(1, 1 - 2 lam)) >= 0
    hi = max(1.0, 1.0 - 2 * lam)
    root = brentq(f, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    return float(_polish(f, df, root))


def u_star(lam: float) -> float | Infinity:
    """Positive root of 4 lam^2 e^3 + 8 lam^3 e^2 - e + 2 lam for lam < 0, else INFINITY."""
    lam = float(lam)
    if lam >= 0:
        return INFINITY
    f = lambda e: ((4 * lam * lam * e + 8 * lam**3) * e - 1) * e + 2 * lam
    df = lambda e: (12 * lam * lam * e + 16 * lam**3) * e - 1
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2
    root = brentq(f, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=500)
    return float(_polish(f, df, root))


def xi_of(lam: float, e1: float) -> float:
    """Momentum length determined by Q(e1) = 0."""
    if not e1 > 0:
        raise ValueError(f"e1 must be positive, got {e1!r}")
    a = e1 * (e1 + 2 * lam)
    return math.hypot(1.0, a) / (2 * e1)


def eta_hat(lam: float) -> float:
    """Infimum of admissible momentum lengths, reached at the critical circle."""
    return xi_of(lam, eta(lam))


def quartic_Q(t, lam: float, xi: float):
    return t**4 + 4 * lam * t**3 + 4 * (lam * lam - xi * xi) * t**2 + 1


def _cubic_roots(b: complex, c: complex, d: complex) -> list[complex]:
    """Roots of t^3 + b t^2 + c t + d by Cardano's formula."""
    p = c - b * b / 3
    q = 2 * b**3 / 27 - b * c / 3 + d
    disc = (q / 2) ** 2 + (p / 3) ** 3
    sq = cmath.sqrt(disc)
    # pick the larger-modulus branch to avoid cancellation
    w = -q / 2 + sq if abs(-q / 2 + sq) >= abs(-q / 2 - sq) else -q / 2 - sq
    if w == 0:
        u = [0j, 0j, 0j]
        v = [0j, 0j, 0j]
    else:
        u0 = w ** (1 / 3)
        omega = cmath.exp(2j * math.pi / 3)
        u = [u0, u0 * omega, u0 * omega * omega]
        v = [-p / (3 * ui) for ui in u]
    return [ui + vi - b / 3 for ui, vi in zip(u, v)]


@dataclass(frozen=True)
class Parameters:
    """An admissible point with all quantities derived from it.

    ``e3`` and ``e4`` are floats when real (``e3 >= e4``) and a conjugate
    pair of complex numbers otherwise (``e3.imag > 0``).
    """

    lam: float
    e1: float
    xi: float
    e2: float
    e3: complex | float
    e4: complex | float
    region: Region

    @property
    def complex_pair(self) -> bool:
        return isinstance(self.e3, complex)

    @property
    def chi(self) -> int:
        return int(self.region is Region.EXCEPTIONAL)

    @property
    def exceptional_defect(self) -> float:
        """4 lam xi + 1; vanishes on the exceptional locus."""
        return 4 * self.lam * self.xi + 1

    def Q(self, t):
        return quartic_Q(t, self.lam, self.xi)


def quartic_roots(lam: float, e1: float):
    """Remaining roots (e2, e3, e4) of Q after deflating by the known root e1."""
    lam = float(lam)
    e1 = float(e1)
    et = eta(lam)
    if not e1 > et:
        raise AdmissibilityError(f"e1={e1!r} must exceed eta({lam!r})={et!r}")
    b = 4 * lam + e1
    # 4 (lam^2 - xi^2) + e1 b simplifies exactly, avoiding a cancellation for large e1
    c = -1 / (e1 * e1)
    d = -1 / e1
    cubic = lambda t: ((t + b) * t + c) * t + d
    dcubic = lambda t: (3 * t + 2 * b) * t + c
    cands = [_polish(cubic, dcubic, r) for r in _cubic_roots(b, c, d)]
    # exactly one positive real root (sign pattern of Q)
    cands = [r for r in cands if r.real > 0]
    if not cands:
        raise AdmissibilityError("no positive second root")
    e2 = min(cands, key=lambda r: abs(r.imag)).real
    # bracket refinement guards against loss of accuracy near e2 ~ e1
    lo, hi = e2 * (1 - 1e-9), e2 * (1 + 1e-9)
    if cubic(lo) < 0 < cubic(hi):
        e2 = brentq(cubic, lo, hi, xtol=1e-300, rtol=1e-15)
    if not e2 < e1:
        raise AdmissibilityError(f"second root {e2!r} does not lie below e1={e1!r}")
    P = 4 * lam + e1 + e2
    R = 1 / (e1 * e2)
    disc = P * P - 4 * R
    if disc >= 0:
        s = math.sqrt(disc)
        qq = -(P + math.copysign(s, P)) / 2
        r1, r2 = qq, R / qq
        e3, e4 = max(r1, r2), min(r1, r2)
    else:
        s = math.sqrt(-disc)
        e3 = complex(-P / 2, s / 2)
        e4 = e3.conjugate()
    return e2, e3, e4


def classify(lam: float, e1: float, tol: float = DEFAULT_REGION_TOL) -> Region:
    """Region of an admissible point relative to the exceptional locus.

    The sign of ``4 lam xi + 1`` decides: positive below ``u_star(lam)``,
    zero on it and negative above it.  For ``lam >= 0`` it is always positive.
    """
    defect = 4 * lam * xi_of(lam, e1) + 1
    if lam >= 0 or defect > tol:
        return Region.NEGATIVE
    if defect < -tol:
        return Region.POSITIVE
    return Region.EXCEPTIONAL


def make_parameters(lam: float, e1: float, tol: float = DEFAULT_REGION_TOL) -> Parameters:
    """Validate (lam, e1) and bundle all derived quantities."""
    e2, e3, e4 = quartic_roots(lam, e1)
    return Parameters(
        lam=float(lam),
        e1=float(e1),
        xi=xi_of(lam, e1),
        e2=e2,
        e3=e3,
        e4=e4,
        region=classify(lam, e1, tol),
    )


def e1_from_xi(lam: float, xi: float) -> float:
    """Invert :func:`xi_of` on the admissible branch e1 > eta(lam)."""
    lo = eta(lam)
    if not xi > xi_of(lam, lo):
        raise AdmissibilityError(f"xi={xi!r} does not exceed eta_hat({lam!r})")
    hi = 2 * lo
    while xi_of(lam, hi) < xi:
        hi *= 2
    return brentq(lambda e: xi_of(lam, e) - xi, lo, hi, xtol=1e-300, rtol=1e-15)
