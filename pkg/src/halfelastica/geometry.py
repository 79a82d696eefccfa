"""Spherical curve, Frenet frame, monodromy, momentum and self-intersection invariants.

The curve in standard form is

    gamma(s) = (h(s), -rho(s) cos theta(s), rho(s) sin theta(s))

with ``h = 1/(2 xi mu)``, ``rho = sigma sqrt(4 xi^2 mu^2 - 1) / (2 xi mu)`` and
``theta`` the angular function based at ``s = omega/2`` (where ``mu = e1``).
Off the exceptional locus ``sigma = 1``; on it ``sigma`` alternates sign from
one period to the next and the curve passes through the pole (1, 0, 0) at
every ``s`` in ``omega Z``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.spatial import cKDTree

from .period import ClosureSpec, psi, psi_hat
from .profile import (
    ODE_ATOL,
    ODE_RTOL,
    IntegrationError,
    NumericalError,
    ProfileSamples,
    _integrate_profile,
    el_rhs,
    elliptic_constants,
    period_omega,
    quad_over_profile,
    uniform_grid,
)
from .roots import Parameters, Region

__all__ = [
    "NotClosed",
    "NOT_DEFINED",
    "CurveSamples",
    "InvariantReport",
    "SelfIntersections",
    "angular_theta",
    "radial_height",
    "synthesize_curve",
    "frenet_integrate",
    "initial_frame",
    "monodromy",
    "momentum",
    "rotation_x",
    "invariant_report",
    "geometric_self_intersections",
    "gluing_derivative_limits",
    "TANGENCY_TOL",
]

NOT_DEFINED = "NotDefined"
TANGENCY_TOL = 1e-8
ORTHO_TOL = 1e-9
RADICAND_TOL = 1e-10


class NotClosed(ValueError):
    """The parameters do not satisfy the closure condition of the given spec."""


# ---------------------------------------------------------------------------
# pointwise formulas


def _theta_rate(p: Parameters):
    """theta' as a function of mu, using the reduced form on the exceptional locus."""
    xi, lam, e2 = p.xi, p.lam, p.e2
    if p.region is Region.EXCEPTIONAL:
        c = -8 * xi * lam * lam
        return lambda mu: c * mu * mu / (mu + e2)
    return lambda mu: 2 * xi * mu * mu * (mu + 2 * lam) / ((1 - 2 * xi * mu) * (1 + 2 * xi * mu))


def _sigma(p: Parameters, s: np.ndarray, omega: float) -> np.ndarray:
    if p.region is not Region.EXCEPTIONAL:
        return np.ones_like(s)
    k = np.floor(s / omega + 1e-9)
    return np.where(np.mod(k, 2) == 0, 1.0, -1.0)


def _excess(p: Parameters, mu, mudot=None):
    """mu - e2, taken from the conservation law where it is small.

    Close to the curvature minimum ``mu - e2`` carries the ODE's absolute
    error, which a square root would amplify; ``mudot^2 / (mu^2 (e1 - mu)(mu^2 + P mu + R))``
    has only relative error there.
    """
    mu = np.asarray(mu, dtype=float)
    dm = mu - p.e2
    if mudot is None:
        return dm
    e1 = p.e1
    P = 4 * p.lam + e1 + p.e2
    R = 1 / (e1 * p.e2)
    small = np.abs(dm) < 1e-2 * (e1 - p.e2)
    if np.any(small):
        m = mu[small]
        alt = np.asarray(mudot, dtype=float)[small] ** 2 / (m * m * (e1 - m) * (m * m + P * m + R))
        dm = dm.copy()
        dm[small] = alt
    return dm


def _radicand(p: Parameters, mu: np.ndarray, mudot=None) -> np.ndarray:
    """4 xi^2 mu^2 - 1, checked for admissibility and clipped at zero."""
    eps = 0.0 if p.region is Region.EXCEPTIONAL else elliptic_constants(p).pole_offset
    mu = np.asarray(mu, dtype=float)
    d = 2 * p.xi * (_excess(p, mu, mudot) + eps) * (2 * p.xi * mu + 1)
    if np.any(d < -RADICAND_TOL):
        raise NumericalError(f"4 xi^2 mu^2 - 1 reached {d.min():.3e}")
    return np.clip(d, 0.0, None)


def _rho_rate_factor(p: Parameters, s, mu, mudot, omega):
    """mudot / sqrt(4 xi^2 mu^2 - 1), finite through the pole on the exceptional locus."""
    if p.region is not Region.EXCEPTIONAL:
        return mudot / np.sqrt(_radicand(p, mu, mudot))
    e1, e2 = p.e1, p.e2
    P = 4 * p.lam + e1 + e2
    R = 1 / (e1 * e2)
    # sign of mudot by phase: mu increases on (k omega, k omega + omega/2)
    frac = np.mod(s / omega + 1e-9, 1.0)
    sgn = np.where(frac < 0.5, 1.0, -1.0)
    tail = np.clip((e1 - mu) * (mu * mu + P * mu + R), 0.0, None)
    return sgn * mu * e2 * np.sqrt(tail) / np.sqrt(mu + e2)


def rotation_x(angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def initial_frame(p: Parameters) -> np.ndarray:
    """Frenet frame at ``s = omega/2``; columns are gamma, gamma', gamma x gamma'."""
    a = p.e1 * (p.e1 + 2 * p.lam)
    d = math.hypot(1.0, a)
    e1 = np.array([1 / d, -a / d, 0.0])
    e2 = np.array([0.0, 0.0, -1.0])
    return np.column_stack([e1, e2, np.cross(e1, e2)])


# ---------------------------------------------------------------------------
# samples


@dataclass(frozen=True)
class CurveSamples:
    """Samples of a B-curve in standard form.

    ``tangent`` holds gamma'(s); when ``frames`` is present its columns are
    (gamma, gamma', gamma x gamma') from the Frenet integration.
    """

    s: np.ndarray
    gamma: np.ndarray
    tangent: np.ndarray
    theta: np.ndarray
    rho: np.ndarray
    height: np.ndarray
    sigma: np.ndarray
    mu: np.ndarray
    mudot: np.ndarray
    omega: float
    chi: int
    params: Parameters = field(repr=False)
    frames: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.s.size

    def invariant_violations(self, tol: float = 1e-8) -> list[str]:
        """Names of the structural invariants that fail at ``tol``; empty when all hold."""
        p = self.params
        bad = []
        if np.max(np.abs(np.linalg.norm(self.gamma, axis=1) - 1)) > tol:
            bad.append("unit sphere")
        if np.max(np.abs(self.height**2 + self.rho**2 - 1)) > tol:
            bad.append("cylindrical split")
        lo, hi = 1 / (2 * p.xi * p.e1), 1 / (2 * p.xi * p.e2)
        if self.height.min() < lo - tol or self.height.max() > hi + tol:
            bad.append("slab")
        if self.frames is not None:
            eye = np.eye(3)
            ortho = np.max(np.abs(np.einsum("nji,njk->nik", self.frames, self.frames) - eye))
            dets = np.linalg.det(self.frames)
            if ortho > 10 * tol or np.max(np.abs(dets - 1)) > 10 * tol:
                bad.append("SO(3)")
        if np.any(np.diff(self.s) <= 0):
            bad.append("grid order")
        return bad


def _grid(p: Parameters, n_periods: float, step: float, start: float):
    if not n_periods > 0:
        raise ValueError("n_periods must be positive")
    omega = period_omega(p)
    return omega, start + uniform_grid(n_periods * omega, step)


def _profile_with_theta(p: Parameters, s: np.ndarray, omega: float, rtol, atol):
    rate = _theta_rate(p)
    mu, mudot, theta = _integrate_profile(
        p,
        s,
        rtol=rtol,
        atol=atol,
        extra=lambda m, v: (rate(m),),
        extra0=(0.0,),
        origin=omega / 2,
        mu0=p.e1,
    )
    return mu, mudot, theta


def angular_theta(profile: ProfileSamples, *, rtol: float = ODE_RTOL, atol: float = ODE_ATOL) -> np.ndarray:
    """Angular function on the profile's grid, normalized by theta(omega/2) = 0."""
    p = profile.params
    _, _, theta = _profile_with_theta(p, profile.s, profile.omega, rtol, atol)
    return theta


def radial_height(profile: ProfileSamples):
    """(rho, h, sigma) on the profile's grid."""
    p = profile.params
    mu = np.asarray(profile.mu, dtype=float)
    sigma = _sigma(p, profile.s, profile.omega)
    rho = sigma * np.sqrt(_radicand(p, mu, profile.mudot)) / (2 * p.xi * mu)
    return rho, 1 / (2 * p.xi * mu), sigma


def _assemble(p, s, omega, mu, mudot, theta):
    sigma = _sigma(p, s, omega)
    rho = sigma * np.sqrt(_radicand(p, mu, mudot)) / (2 * p.xi * mu)
    h = 1 / (2 * p.xi * mu)
    ct, st = np.cos(theta), np.sin(theta)
    gamma = np.column_stack([h, -rho * ct, rho * st])
    dth = _theta_rate(p)(mu)
    dh = -mudot / (2 * p.xi * mu * mu)
    drho = sigma * _rho_rate_factor(p, s, mu, mudot, omega) / (2 * p.xi * mu * mu)
    tangent = np.column_stack([dh, -drho * ct + rho * dth * st, drho * st + rho * dth * ct])
    return gamma, tangent, rho, h, sigma


def synthesize_curve(
    params: Parameters,
    n_periods: float = 1,
    step: float = 1e-2,
    *,
    start: float = 0.0,
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
) -> CurveSamples:
    """Closed-form synthesis of gamma on ``[start, start + n_periods * omega]``."""
    p = params
    omega, s = _grid(p, n_periods, step, start)
    mu, mudot, theta = _profile_with_theta(p, s, omega, rtol, atol)
    gamma, tangent, rho, h, sigma = _assemble(p, s, omega, mu, mudot, theta)
    return CurveSamples(
        s=s,
        gamma=gamma,
        tangent=tangent,
        theta=theta,
        rho=rho,
        height=h,
        sigma=sigma,
        mu=mu,
        mudot=mudot,
        omega=omega,
        chi=p.chi,
        params=p,
    )


# ---------------------------------------------------------------------------
# Frenet frame


def _polar(F: np.ndarray) -> np.ndarray:
    u, _, vt = np.linalg.svd(F)
    return u @ vt


def _frenet_run(p: Parameters, s: np.ndarray, omega: float, rtol, atol):
    """(mu, mudot, theta, frames) on ``s``, integrated outward from omega/2 in chunks.

    Between chunks the frame is projected back onto SO(3) if its
    orthogonality residual exceeds ORTHO_TOL.
    """
    rhs0 = el_rhs(p.lam)
    rate = _theta_rate(p)

    def rhs(t, y):
        mu, v = y[0], y[1]
        k = mu * mu
        F = y[3:].reshape(3, 3)
        dF = np.empty((3, 3))
        dF[:, 0] = F[:, 1]
        dF[:, 1] = -F[:, 0] + k * F[:, 2]
        dF[:, 2] = -k * F[:, 1]
        return np.concatenate([rhs0(t, y), [rate(mu)], dF.ravel()])

    origin = omega / 2
    y0 = np.concatenate([[p.e1, 0.0, 0.0], initial_frame(p).ravel()])
    out = np.empty((12, s.size))
    chunk = omega / 4
    for sign in (1.0, -1.0):
        mask = s >= origin if sign > 0 else s < origin
        if not mask.any():
            continue
        idx = np.nonzero(mask)[0]
        pts = s[idx]
        order = np.argsort(sign * pts)
        pts, idx = pts[order], idx[order]
        end = pts[-1]
        t0, y = origin, y0.copy()
        done = 0
        while True:
            t1 = t0 + sign * chunk
            last = sign * (t1 - end) >= 0
            if last:
                t1 = end
            sel = []
            while done < pts.size and sign * (pts[done] - t1) <= 0:
                sel.append(done)
                done += 1
            if t1 != t0:
                teval = np.append(pts[sel], t1) if not sel or pts[sel[-1]] != t1 else pts[sel]
                sol = solve_ivp(rhs, (t0, t1), y, method="DOP853", rtol=rtol, atol=atol, t_eval=teval)
                if sol.status < 0 or sol.t.size != teval.size:
                    raise IntegrationError(sol.message)
                if sel:
                    out[:, idx[sel]] = sol.y[:, : len(sel)]
                y = sol.y[:, -1].copy()
            elif sel:
                out[:, idx[sel]] = y[:, None]
            F = y[3:].reshape(3, 3)
            if np.max(np.abs(F.T @ F - np.eye(3))) > ORTHO_TOL:
                y[3:] = _polar(F).ravel()
            t0 = t1
            if last:
                break
    frames = out[3:].T.reshape(-1, 3, 3)
    return out[0], out[1], out[2], frames


def frenet_integrate(
    params: Parameters,
    n_periods: float = 1,
    step: float = 1e-2,
    *,
    start: float = 0.0,
    rtol: float = ODE_RTOL,
    atol: float = ODE_ATOL,
) -> CurveSamples:
    """Curve from the Frenet system F' = F K started at the standard frame at omega/2.

    ``gamma`` and ``tangent`` are the first two frame columns; theta, rho
    and h are filled from the same run for reference.
    """
    p = params
    omega, s = _grid(p, n_periods, step, start)
    mu, mudot, theta, frames = _frenet_run(p, s, omega, rtol, atol)
    sigma = _sigma(p, s, omega)
    rho = sigma * np.sqrt(_radicand(p, mu, mudot)) / (2 * p.xi * mu)
    return CurveSamples(
        s=s,
        gamma=frames[:, :, 0].copy(),
        tangent=frames[:, :, 1].copy(),
        theta=theta,
        rho=rho,
        height=1 / (2 * p.xi * mu),
        sigma=sigma,
        mu=mu,
        mudot=mudot,
        omega=omega,
        chi=p.chi,
        params=p,
        frames=frames,
    )


def monodromy(params: Parameters, *, rtol: float = ODE_RTOL, atol: float = ODE_ATOL):
    """Monodromy m = F(omega) F(0)^T and its rotation angle.

    m is a rotation about the x axis; the angle returned is ``phi`` in
    [0, 2 pi) with ``m = rotation_x(-phi)``, which equals the regularized jump.
    """
    p = params
    omega = period_omega(p)
    _, _, _, frames = _frenet_run(p, np.array([0.0, omega]), omega, rtol, atol)
    m = frames[1] @ frames[0].T
    angle = math.atan2(-m[2, 1], m[1, 1]) % (2 * math.pi)
    return m, angle


def momentum(curve: CurveSamples):
    """Per-sample momentum vector J and its drift ``max |J_i - mean(J)|``."""
    g = curve.gamma
    t = curve.frames[:, :, 1] if curve.frames is not None else curve.tangent
    mu = curve.mu[:, None]
    lam = curve.params.lam
    J = g / (2 * mu) - curve.mudot[:, None] / (2 * mu * mu) * t + (mu / 2 + lam) * np.cross(g, t)
    drift = float(np.max(np.linalg.norm(J - J.mean(axis=0), axis=1)))
    return J, drift


def gluing_derivative_limits(params: Parameters, *, offset: float = 1e-4):
    """One-sided derivatives at s = omega of f = sigma sqrt(4 xi^2 mu^2 - 1) (exceptional case).

    Each one-sided value is the slope of a secant from the pole, extrapolated
    to zero offset by Richardson on ``offset`` and ``offset / 2``.
    """
    p = params
    if p.region is not Region.EXCEPTIONAL:
        raise ValueError("gluing is only defined on the exceptional locus")
    omega = period_omega(p)
    hs = np.array([offset, offset / 2])
    s = np.concatenate([omega - hs, omega + hs])
    mu, mudot = _integrate_profile(p, s, origin=omega / 2, mu0=p.e1)
    f = _sigma(p, s, omega) * np.sqrt(_radicand(p, mu, mudot))
    left = (0 - f[:2]) / hs
    right = (f[2:] - 0) / hs
    return float(2 * left[1] - left[0]), float(2 * right[1] - right[0])


# ---------------------------------------------------------------------------
# invariants


@dataclass(frozen=True)
class InvariantReport:
    region: Region
    m: int
    n: int
    q: Fraction
    symmetry_order: int
    linking_number: int | str
    turning_number: int | None
    ordinary_double_points: int
    tangential_double_points: int
    pole_multiplicity: int
    axis_crossings: int
    theta_star: float | None = None
    lemma_case: str | None = None
    k: int | None = None

    @property
    def total_self_intersections(self) -> int:
        """Distinct multiple points: double points plus the pole, if any."""
        return self.ordinary_double_points + self.tangential_double_points + (1 if self.pole_multiplicity else 0)

    def as_dict(self) -> dict:
        return {
            "region": self.region.value,
            "m": self.m,
            "n": self.n,
            "q": f"{self.q.numerator}/{self.q.denominator}",
            "symmetry_order": self.symmetry_order,
            "linking_number": self.linking_number,
            "turning_number": self.turning_number,
            "ordinary_double_points": self.ordinary_double_points,
            "tangential_double_points": self.tangential_double_points,
            "pole_multiplicity": self.pole_multiplicity,
            "axis_crossings": self.axis_crossings,
            "theta_star": self.theta_star,
            "lemma_case": self.lemma_case,
            "k": self.k,
        }


def _theta_of_mu(p: Parameters, y: float) -> float:
    """Angular function at the point of the rising half-period where mu = y, based at mu = e2."""
    if y <= p.e2:
        return 0.0
    xi, lam, e2 = p.xi, p.lam, p.e2
    if p.region is Region.EXCEPTIONAL:
        c = -8 * xi * lam * lam
        g = lambda mu, dm: c * mu / (mu + e2)
    else:
        g = lambda mu, dm: 2 * xi * mu * (mu + 2 * lam) / ((1 - 2 * xi * mu) * (1 + 2 * xi * mu))
    return quad_over_profile(p, g, upto=min(y, p.e1))


def _levels_inside(lo: float, hi: float, base: float, spacing: float, tol: float) -> list[int]:
    """Integers j with base + j*spacing strictly inside (lo, hi), at distance > tol from both ends."""
    a, b = min(lo, hi), max(lo, hi)
    j0 = math.floor((a - base) / spacing) - 1
    j1 = math.ceil((b - base) / spacing) + 1
    return [j for j in range(j0, j1 + 1) if a + tol < base + j * spacing < b - tol]


def _exceptional_turning(m: int, n: int) -> int:
    """Total curvature bookkeeping of the plane projection through q - 1/2 = mh/nh."""
    qh = Fraction(m, n) - Fraction(1, 2)
    mh, nh = qh.numerator, qh.denominator
    if nh % 2 == 0:
        k = nh // 2
        if k % 2 == 1:
            return (k - mh) // 2
        return nh // 2 - mh
    return nh - 2 * mh


def invariant_report(
    params: Parameters,
    spec: ClosureSpec,
    curve: CurveSamples | None = None,
    *,
    residual_tol: float = 1e-8,
    tangency_tol: float = TANGENCY_TOL,
) -> InvariantReport:
    """Integer invariants of a closed curve, counted from the angular function.

    Double points are the solutions ``s`` in the open rising half-period of
    ``theta(s) in (pi/n) Z`` (``pi/2 + (pi/n) Z`` on the exceptional locus),
    each contributing an orbit of n points.  A level touched by an interior
    extremum of theta within ``tangency_tol`` yields n tangential points.
    ``curve`` is accepted for interface symmetry and is not needed.
    """
    p = params
    m, n = spec.m, spec.n
    ph = psi_hat(p)
    gap = abs(ph - spec.target)
    gap = min(gap, 2 * math.pi - gap)
    if gap > residual_tol:
        raise NotClosed(f"psi_hat misses 2 pi m/n by {gap:.3e}")

    spacing = math.pi / n
    theta_end = _theta_of_mu(p, p.e1)

    if p.region is Region.EXCEPTIONAL:
        levels = _levels_inside(theta_end, 0.0, math.pi / 2, spacing, tangency_tol)
        return InvariantReport(
            region=p.region,
            m=m,
            n=n,
            q=spec.q,
            symmetry_order=n,
            linking_number=NOT_DEFINED,
            turning_number=_exceptional_turning(m, n),
            ordinary_double_points=n * len(levels),
            tangential_double_points=0,
            pole_multiplicity=n,
            axis_crossings=n,
        )

    linking = -n * psi(p) / (2 * math.pi)
    if abs(linking - round(linking)) > 1e-6:
        raise NotClosed(f"non-integral linking number {linking!r}")
    linking = int(round(linking))

    turn = -2 * p.lam
    interior = p.e2 < turn < p.e1
    count = 0
    tangential = 0
    theta_star = None
    if interior:
        theta_star = _theta_of_mu(p, turn)
        count += len(_levels_inside(0.0, theta_star, 0.0, spacing, tangency_tol))
        count += len(_levels_inside(theta_star, theta_end, 0.0, spacing, tangency_tol))
        near = round(theta_star / spacing)
        if abs(theta_star - near * spacing) <= tangency_tol and near != 0:
            tangential = n
    else:
        count += len(_levels_inside(0.0, theta_end, 0.0, spacing, tangency_tol))

    lemma_case = None
    k = None
    if p.region is Region.POSITIVE and theta_star is not None:
        k = sum(1 for j in range(m + 1, m + 2 + int(theta_star / spacing)) if j * spacing < theta_star - tangency_tol)
        if tangential:
            lemma_case = "c"
        elif k == 0:
            lemma_case = "a"
        else:
            lemma_case = "b"

    return InvariantReport(
        region=p.region,
        m=m,
        n=n,
        q=spec.q,
        symmetry_order=n,
        linking_number=linking,
        turning_number=None,
        ordinary_double_points=n * count,
        tangential_double_points=tangential,
        pole_multiplicity=0,
        axis_crossings=0,
        theta_star=theta_star,
        lemma_case=lemma_case,
        k=k,
    )


# ---------------------------------------------------------------------------
# geometric sweep


@dataclass(frozen=True)
class SelfIntersections:
    """Clustered crossing points of the sampled polyline.

    ``multiplicity[i]`` is the number of distinct branches through
    ``points[i]``; ``near_tangencies`` are clusters where two branches come
    within the widened band without crossing.
    """

    points: np.ndarray
    multiplicity: list[int]
    near_tangencies: np.ndarray

    def __len__(self) -> int:
        return len(self.points)


def _cluster(points: np.ndarray, tol: float) -> np.ndarray:
    """Cluster labels by single linkage at distance ``tol``."""
    n = len(points)
    parent = np.arange(n)

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    if n:
        for i, j in cKDTree(points).query_pairs(tol):
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[ri] = rj
    roots = np.array([find(i) for i in range(n)], dtype=int)
    _, labels = np.unique(roots, return_inverse=True)
    return labels


def _branches(indices, n_seg: int, gap: int) -> int:
    """Number of runs of cyclically consecutive segment indices."""
    idx = sorted(set(indices))
    if not idx:
        return 0
    runs = 1
    for a, b in zip(idx, idx[1:]):
        if b - a > gap:
            runs += 1
    if len(idx) > 1 and runs > 1 and (idx[0] + n_seg - idx[-1]) <= gap:
        runs -= 1
    return runs


def _segment_hits(A, B, C, D, eps=1e-12):
    """Intersections of 2-D segments AB and CD (vectorized); returns (mask, t)."""
    r = B - A
    s = D - C
    denom = r[:, 0] * s[:, 1] - r[:, 1] * s[:, 0]
    qp = C - A
    with np.errstate(divide="ignore", invalid="ignore"):
        t = (qp[:, 0] * s[:, 1] - qp[:, 1] * s[:, 0]) / denom
        u = (qp[:, 0] * r[:, 1] - qp[:, 1] * r[:, 0]) / denom
    ok = (np.abs(denom) > 0) & (t >= -eps) & (t <= 1 + eps) & (u >= -eps) & (u <= 1 + eps)
    return ok, t


def _segment_distance(A, B, C, D):
    """Minimum distance between 2-D segments (vectorized, no intersection assumed)."""

    def point_seg(P, X, Y):
        d = Y - X
        L = np.einsum("ij,ij->i", d, d)
        w = np.clip(np.einsum("ij,ij->i", P - X, d) / np.where(L > 0, L, 1), 0, 1)
        proj = X + w[:, None] * d
        return np.linalg.norm(P - proj, axis=1), proj

    cands = [point_seg(A, C, D), point_seg(B, C, D), point_seg(C, A, B), point_seg(D, A, B)]
    dist = np.min(np.column_stack([c[0] for c in cands]), axis=1)
    return dist


def geometric_self_intersections(
    curve: CurveSamples,
    *,
    tol: float = 1e-5,
    band: float | None = None,
) -> SelfIntersections:
    """Crossings of the closed sample polyline, found by a segment sweep.

    The curve lies in the hemisphere x > 0, where the gnomonic projection
    (y/x, z/x) maps great-circle arcs to straight segments, so chords between
    samples can be intersected exactly in the plane.  Crossings are mapped
    back to the sphere and merged at distance ``tol``.  ``band`` widens the
    search to near misses (default: 50 times the largest chord sagitta).
    """
    g = curve.gamma
    if np.linalg.norm(g[-1] - g[0]) < 1e-6:
        g = g[:-1]
        closed = True
    else:
        closed = False
    if np.any(g[:, 0] <= 0):
        raise NumericalError("curve leaves the hemisphere x > 0")
    uv = g[:, 1:] / g[:, :1]
    n_pts = len(uv)
    start = np.arange(n_pts if closed else n_pts - 1)
    end = (start + 1) % n_pts
    A, B = uv[start], uv[end]
    n_seg = len(start)
    # candidate pairs from chords on the sphere, where lengths are uniform
    chords = np.linalg.norm(g[end] - g[start], axis=1)
    cmax = float(chords.max())
    if band is None:
        kappa = float(np.max(curve.mu) ** 2) + 1
        band = 50 * kappa * cmax * cmax / 8
    mids = 0.5 * (g[start] + g[end])
    pairs = cKDTree(mids).query_pairs(cmax + band, output_type="ndarray")
    if len(pairs) == 0:
        return SelfIntersections(np.empty((0, 3)), [], np.empty((0, 3)))
    i, j = pairs[:, 0], pairs[:, 1]
    sep = np.abs(i - j)
    if closed:
        sep = np.minimum(sep, n_seg - sep)
    keep = sep > 1
    i, j = i[keep], j[keep]

    hit, t = _segment_hits(A[i], B[i], A[j], B[j])
    pts2 = A[i[hit]] + t[hit, None] * (B[i[hit]] - A[i[hit]])
    pts3 = np.column_stack([np.ones(len(pts2)), pts2])
    pts3 /= np.linalg.norm(pts3, axis=1)[:, None]
    labels = _cluster(pts3, tol)
    points, mult = [], []
    gap = 3
    hi, hj = i[hit], j[hit]
    for c in range(labels.max() + 1 if len(labels) else 0):
        sel = labels == c
        points.append(pts3[sel].mean(axis=0))
        mult.append(max(2, _branches(np.concatenate([hi[sel], hj[sel]]), n_seg, gap)))
    points = np.array(points).reshape(-1, 3)

    # near misses away from any crossing
    ni, nj = i[~hit], j[~hit]
    P0, P1 = g[start], g[end]
    dist = _segment_distance(P0[ni], P1[ni], P0[nj], P1[nj])
    close = dist < band
    near = np.empty((0, 3))
    if close.any():
        mid3 = 0.25 * (P0[ni[close]] + P1[ni[close]] + P0[nj[close]] + P1[nj[close]])
        mid3 /= np.linalg.norm(mid3, axis=1)[:, None]
        lab = _cluster(mid3, 20 * cmax)
        cand = np.array([mid3[lab == c].mean(axis=0) for c in range(lab.max() + 1)])
        if len(points):
            dmin, _ = cKDTree(points).query(cand)
            cand = cand[dmin > 20 * cmax]
        near = cand
    return SelfIntersections(points, mult, near)
