"""Closed 1/2-elasticae on the unit sphere.

Modules: ``elliptic`` (Carlson forms), ``roots`` (parameter algebra),
``profile`` (curvature profile), ``period`` (jump and closure),
``geometry`` (curve and invariants), ``planar`` (planar control) and ``cli``.
"""

__version__ = "0.1.0"

from .geometry import (
    CurveSamples,
    InvariantReport,
    frenet_integrate,
    geometric_self_intersections,
    invariant_report,
    momentum,
    monodromy,
    synthesize_curve,
)
from .period import ClosureSpec, psi, psi_hat, solve_closure, solve_exceptional
from .profile import bending_energy, mu_samples, period_omega
from .roots import Parameters, Region, eta, make_parameters, u_star

__all__ = [
    "__version__",
    "ClosureSpec",
    "CurveSamples",
    "InvariantReport",
    "Parameters",
    "Region",
    "bending_energy",
    "eta",
    "frenet_integrate",
    "geometric_self_intersections",
    "invariant_report",
    "make_parameters",
    "momentum",
    "monodromy",
    "mu_samples",
    "period_omega",
    "psi",
    "psi_hat",
    "solve_closure",
    "solve_exceptional",
    "synthesize_curve",
    "u_star",
]
