"""Legendre elliptic integrals and Jacobi amplitude via Carlson symmetric forms.

Parameters follow the ``m`` convention: ``delta`` multiplies ``sin^2`` inside the
square root and ``zeta`` is the characteristic of the third-kind integral, so

    K(phi, delta)       = int_0^phi dt / sqrt(1 - delta sin^2 t)
    Pi(zeta, phi, delta) = int_0^phi dt / ((1 - zeta sin^2 t) sqrt(1 - delta sin^2 t))

The Carlson kernels ``rf``, ``rd``, ``rj`` and ``rc`` accept real or complex
arguments (principal branches).  Real inputs return ``float``; complex inputs
return ``complex``.

References:
    B. C. Carlson, "Numerical computation of real or complex elliptic
    integrals", Numer. Algorithms 10 (1995).
"""

from __future__ import annotations

import cmath
import math

__all__ = [
    "EllipticDomainError",
    "rf",
    "rd",
    "rj",
    "rc",
    "complete_K",
    "complete_E",
    "complete_Pi",
    "incomplete_K",
    "incomplete_E",
    "incomplete_Pi",
    "jacobi_am",
    "jacobi_sn",
]

_RTOL = 1e-16
_MAXITER = 100


class EllipticDomainError(ValueError):
    """Argument outside the supported domain of an elliptic integral."""


def _is_complex(*args) -> bool:
    return any(isinstance(a, complex) for a in args)


def _sqrt(z):
    return cmath.sqrt(z) if isinstance(z, complex) else math.sqrt(z)


def _finish(value, cplx: bool):
    if cplx:
        return complex(value)
    return float(value.real) if isinstance(value, complex) else float(value)


def rf(x, y, z):
    """Carlson's R_F(x, y, z) = 1/2 int_0^inf dt / sqrt((t+x)(t+y)(t+z))."""
    cplx = _is_complex(x, y, z)
    if not cplx and min(x, y, z) < 0:
        raise EllipticDomainError("rf: real arguments must be nonnegative")
    if not cplx and ((x == 0) + (y == 0) + (z == 0)) > 1:
        raise EllipticDomainError("rf: at most one argument may vanish")
    if cplx:
        x, y, z = complex(x), complex(y), complex(z)
    a0 = (x + y + z) / 3
    q = (3 * _RTOL) ** (-1 / 6) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    f = 1.0
    for _ in range(_MAXITER):
        if q / f < abs(a):
            break
        sx, sy, sz = _sqrt(x), _sqrt(y), _sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        x = (x + lam) / 4
        y = (y + lam) / 4
        z = (z + lam) / 4
        a = (a + lam) / 4
        f *= 4
    X = 1 - x / a
    Y = 1 - y / a
    Z = -(X + Y)
    e2 = X * Y - Z * Z
    e3 = X * Y * Z
    val = (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / _sqrt(a)
    return _finish(val, cplx)


def rc(x, y):
    """Carlson's degenerate R_C(x, y) = R_F(x, y, y); Cauchy principal value for real y < 0."""
    cplx = _is_complex(x, y)
    if not cplx and y < 0:
        if x < 0:
            raise EllipticDomainError("rc: x must be nonnegative")
        return math.sqrt(x / (x - y)) * rc(x - y, -y)
    if not cplx and y == 0:
        raise EllipticDomainError("rc: y must be nonzero")
    if not cplx:
        # closed forms are faster and exact to rounding for real arguments
        if x == y:
            return 1 / math.sqrt(x)
        if x == 0:
            return math.pi / (2 * math.sqrt(y))
        if x < y:
            return math.atan(math.sqrt((y - x) / x)) / math.sqrt(y - x)
        return math.atanh(math.sqrt((x - y) / x)) / math.sqrt(x - y)
    return rf(x, y, y)


def rd(x, y, z):
    """Carlson's R_D(x, y, z) = R_J(x, y, z, z)."""
    cplx = _is_complex(x, y, z)
    if not cplx and (min(x, y) < 0 or z <= 0 or (x == 0 and y == 0)):
        raise EllipticDomainError("rd: invalid real arguments")
    if cplx:
        x, y, z = complex(x), complex(y), complex(z)
    a0 = (x + y + 3 * z) / 5
    q = (_RTOL / 4) ** (-1 / 6) * max(abs(a0 - x), abs(a0 - y), abs(a0 - z))
    a = a0
    f = 1.0
    total = 0.0
    for _ in range(_MAXITER):
        if q / f < abs(a):
            break
        sx, sy, sz = _sqrt(x), _sqrt(y), _sqrt(z)
        lam = sx * sy + sx * sz + sy * sz
        total += 1 / (f * sz * (z + lam))
        x = (x + lam) / 4
        y = (y + lam) / 4
        z = (z + lam) / 4
        a = (a + lam) / 4
        f *= 4
    X = 1 - x / a
    Y = 1 - y / a
    Z = -(X + Y) / 3
    e2 = X * Y - 6 * Z * Z
    e3 = (3 * X * Y - 8 * Z * Z) * Z
    e4 = 3 * (X * Y - Z * Z) * Z * Z
    e5 = X * Y * Z * Z * Z
    series = (
        1
        - 3 * e2 / 14
        + e3 / 6
        + 9 * e2 * e2 / 88
        - 3 * e4 / 22
        - 9 * e2 * e3 / 52
        + 3 * e5 / 26
    )
    val = series / (f * a * _sqrt(a)) + 3 * total
    return _finish(val, cplx)


def rj(x, y, z, p):
    """Carlson's R_J(x, y, z, p); Cauchy principal value for real p < 0."""
    cplx = _is_complex(x, y, z, p)
    if not cplx:
        if min(x, y, z) < 0 or ((x == 0) + (y == 0) + (z == 0)) > 1 or p == 0:
            raise EllipticDomainError("rj: invalid real arguments")
        if p < 0:
            return _rj_pv(x, y, z, p)
    else:
        x, y, z, p = complex(x), complex(y), complex(z), complex(p)
    a0 = (x + y + z + 2 * p) / 5
    delta = (p - x) * (p - y) * (p - z)
    q = (_RTOL / 4) ** (-1 / 6) * max(
        abs(a0 - x), abs(a0 - y), abs(a0 - z), abs(a0 - p)
    )
    a = a0
    f = 1.0
    total = 0.0
    for _ in range(_MAXITER):
        if q / f < abs(a):
            break
        sx, sy, sz, sp = _sqrt(x), _sqrt(y), _sqrt(z), _sqrt(p)
        lam = sx * sy + sx * sz + sy * sz
        d = (sp + sx) * (sp + sy) * (sp + sz)
        e = delta / (f**3 * d * d)
        total += rc(1, 1 + e) / (f * d)
        x = (x + lam) / 4
        y = (y + lam) / 4
        z = (z + lam) / 4
        p = (p + lam) / 4
        a = (a + lam) / 4
        f *= 4
    X = 1 - x / a
    Y = 1 - y / a
    Z = 1 - z / a
    P = -(X + Y + Z) / 2
    e2 = X * Y + X * Z + Y * Z - 3 * P * P
    e3 = X * Y * Z + 2 * e2 * P + 4 * P**3
    e4 = (2 * X * Y * Z + e2 * P + 3 * P**3) * P
    e5 = X * Y * Z * P * P
    series = (
        1
        - 3 * e2 / 14
        + e3 / 6
        + 9 * e2 * e2 / 88
        - 3 * e4 / 22
        - 9 * e2 * e3 / 52
        + 3 * e5 / 26
    )
    val = series / (f * a * _sqrt(a)) + 6 * total
    return _finish(val, cplx)


def _rj_pv(x, y, z, p):
    # principal value for p < 0 via the shift to a positive p' (Carlson 1995, sec. 4)
    x, y, z = sorted((x, y, z))
    a = 1 / (y - p)
    b = a * (z - y) * (y - x)
    pt = y + b
    rho = x * z / y
    tau = p * pt / y
    return a * (b * rj(x, y, z, pt) + 3 * (rc(rho, tau) - rf(x, y, z)))


# ---------------------------------------------------------------------------
# Legendre forms


def _check_real_param(name: str, value, upper: float, *, strict: bool = True):
    if isinstance(value, complex):
        return
    if (strict and value >= upper) or (not strict and value > upper) or math.isnan(value):
        rel = "<" if strict else "<="
        raise EllipticDomainError(f"{name} must be {rel} {upper}, got {value!r}")


def complete_K(delta, *, delta_c=None):
    """Complete integral of the first kind K(delta), delta < 1.

    ``delta_c = 1 - delta`` may be supplied when it is known more accurately
    than the subtraction would give (delta close to 1).
    """
    if delta_c is None:
        _check_real_param("delta", delta, 1.0)
        delta_c = 1 - delta
    else:
        _check_real_param("delta_c", -delta_c, 0.0)
    return rf(0.0 * delta_c, delta_c, 1.0)


def complete_E(delta):
    """Complete integral of the second kind E(delta), delta <= 1."""
    _check_real_param("delta", delta, 1.0, strict=False)
    if not isinstance(delta, complex) and delta == 1:
        return 1.0
    if not isinstance(delta, complex) and delta == 0:
        return math.pi / 2
    return rf(0.0 * delta, 1 - delta, 1.0) - delta / 3 * rd(0.0 * delta, 1 - delta, 1.0)


def complete_Pi(zeta, delta, *, zeta_c=None, delta_c=None):
    """Complete integral of the third kind Pi(zeta, delta), zeta < 1, delta < 1.

    Optional complements ``zeta_c = 1 - zeta`` and ``delta_c = 1 - delta``
    bypass the cancellation when either parameter is close to 1.
    """
    if delta_c is None:
        _check_real_param("delta", delta, 1.0)
        delta_c = 1 - delta
    else:
        _check_real_param("delta_c", -delta_c, 0.0)
    if zeta_c is None:
        _check_real_param("zeta", zeta, 1.0)
        zeta_c = 1 - zeta
    else:
        _check_real_param("zeta_c", -zeta_c, 0.0)
    k = rf(0.0 * delta_c, delta_c, 1.0)
    if not isinstance(zeta, complex) and zeta == 0:
        return k
    zero = 0.0 * delta_c * zeta_c
    return k + zeta / 3 * rj(zero, delta_c, 1.0, zeta_c)


def _sin_cos_sq(phi):
    if isinstance(phi, complex):
        s = cmath.sin(phi)
        return s, 1 - s * s
    s = math.sin(phi)
    c = math.cos(phi)
    return s, c * c


def _reduce(phi):
    """Split a real amplitude as phi = j*pi + r with |r| <= pi/2."""
    j = math.floor(phi / math.pi + 0.5)
    return j, phi - j * math.pi


def incomplete_K(phi, delta):
    """Incomplete integral of the first kind K(phi, delta).

    Real ``phi`` outside [-pi/2, pi/2] is handled by quasi-periodicity,
    K(phi + j pi) = K(phi) + 2 j K.  ``phi`` may also be complex, in which
    case the symmetric form is evaluated directly on the principal branch.
    """
    if isinstance(phi, complex) or isinstance(delta, complex):
        s, c2 = _sin_cos_sq(phi)
        return s * rf(c2, 1 - delta * s * s, 1.0 + 0j)
    j, r = _reduce(phi)
    s, c2 = _sin_cos_sq(r)
    if delta * s * s >= 1:
        raise EllipticDomainError("delta*sin(phi)^2 must be < 1")
    base = 0.0 if s == 0 else s * rf(c2, 1 - delta * s * s, 1.0)
    if j == 0:
        return base
    return base + 2 * j * complete_K(delta)


def incomplete_E(phi, delta):
    """Incomplete integral of the second kind E(phi, delta)."""
    if isinstance(phi, complex) or isinstance(delta, complex):
        s, c2 = _sin_cos_sq(phi)
        t = 1 - delta * s * s
        return s * rf(c2, t, 1.0 + 0j) - delta * s**3 / 3 * rd(c2, t, 1.0 + 0j)
    j, r = _reduce(phi)
    s, c2 = _sin_cos_sq(r)
    t = 1 - delta * s * s
    if t < 0:
        raise EllipticDomainError("delta*sin(phi)^2 must be <= 1")
    base = 0.0 if s == 0 else s * rf(c2, t, 1.0) - delta * s**3 / 3 * rd(c2, t, 1.0)
    if j == 0:
        return base
    return base + 2 * j * complete_E(delta)


def incomplete_Pi(zeta, phi, delta):
    """Incomplete integral of the third kind Pi(zeta, phi, delta)."""
    if isinstance(phi, complex) or _is_complex(zeta, delta):
        s, c2 = _sin_cos_sq(phi)
        s2 = s * s
        return s * rf(c2, 1 - delta * s2, 1.0 + 0j) + zeta * s * s2 / 3 * rj(
            c2, 1 - delta * s2, 1.0 + 0j, 1 - zeta * s2
        )
    j, r = _reduce(phi)
    s, c2 = _sin_cos_sq(r)
    s2 = s * s
    if delta * s2 >= 1 or (j != 0 and zeta >= 1):
        raise EllipticDomainError("delta*sin(phi)^2 and zeta must be < 1")
    if zeta * s2 == 1:
        raise EllipticDomainError("zeta*sin(phi)^2 must differ from 1")
    if s == 0:
        base = 0.0
    elif zeta == 0:
        base = s * rf(c2, 1 - delta * s2, 1.0)
    else:
        base = s * rf(c2, 1 - delta * s2, 1.0) + zeta * s * s2 / 3 * rj(
            c2, 1 - delta * s2, 1.0, 1 - zeta * s2
        )
    if j == 0:
        return base
    return base + 2 * j * complete_Pi(zeta, delta)


def jacobi_am(u: float, delta: float) -> float:
    """Jacobi amplitude: the phi solving K(phi, delta) = u."""
    _check_real_param("delta", delta, 1.0)
    if u == 0:
        return 0.0
    kk = complete_K(delta)
    j = math.floor(u / (2 * kk) + 0.5)
    r = u - 2 * j * kk  # |r| <= K
    sign = 1.0 if r >= 0 else -1.0
    r = abs(r)
    lo, hi = 0.0, math.pi / 2
    phi = min(math.pi / 2 * r / kk, math.pi / 2)
    for _ in range(100):
        g = incomplete_K(phi, delta) - r
        if g > 0:
            hi = phi
        else:
            lo = phi
        step = g * math.sqrt(1 - delta * math.sin(phi) ** 2)
        nxt = phi - step
        if not lo <= nxt <= hi:
            nxt = 0.5 * (lo + hi)
        if abs(nxt - phi) <= 4e-16 * max(1.0, phi):
            phi = nxt
            break
        phi = nxt
    return j * math.pi + sign * phi


def jacobi_sn(u: float, delta: float) -> float:
    """sn(u, delta) = sin(am(u, delta))."""
    return math.sin(jacobi_am(u, delta))
