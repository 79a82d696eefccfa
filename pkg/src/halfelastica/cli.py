"""Command-line front end.

Exit codes: 0 success, 2 usage or domain error, 3 closure not found,
4 invariant mismatch.
"""

from __future__ import annotations

import functools
import json
import math
import os
import sys
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import click
import numpy as np

from . import __version__
from .elliptic import EllipticDomainError
from .geometry import (
    NotClosed,
    CurveSamples,
    invariant_report,
    synthesize_curve,
)
from .period import (
    DEFAULT_SCAN,
    ClosureSpec,
    InvalidSpec,
    period_map_table,
    psi_hat,
    solve_closure,
    solve_exceptional,
)
from .planar import (
    PlanarDomainError,
    PlanarParams,
    planar_curve,
    planar_displacement,
    planar_h_branch,
    planar_period,
)
from .profile import ODE_RTOL, QUAD_RTOL, bending_energy, period_omega, phase_curve
from .roots import AdmissibilityError, Parameters, Region, eta, make_parameters

SCHEMA = 1
EXIT_OK, EXIT_USAGE, EXIT_NOT_FOUND, EXIT_MISMATCH = 0, 2, 3, 4
SVG_SIZE = 600
SAMPLE_COLUMNS = ["s", "mu", "mudot", "gamma_x", "gamma_y", "gamma_z", "theta", "rho", "height"]


class DomainFailure(click.ClickException):
    exit_code = EXIT_USAGE


class NotFound(click.ClickException):
    exit_code = EXIT_NOT_FOUND


class Mismatch(click.ClickException):
    exit_code = EXIT_MISMATCH


# ---------------------------------------------------------------------------
# serialization


def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    text = format(x, ".17g")
    if text in ("-0", "0"):
        return "0.0" if text == "0" else "-0.0"
    return text


def dumps(obj, indent: int = 0) -> str:
    """JSON with floats at 17 significant digits; one sample row per line."""
    pad = "  " * indent
    inner = "  " * (indent + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k))}: {dumps(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent + 1) for v in obj) + "\n" + pad + "]"
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if isinstance(obj, Fraction):
        return json.dumps(f"{obj.numerator}/{obj.denominator}")
    return json.dumps(str(obj))


def _write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
    with os.fdopen(fd, "w", newline="\n") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _emit(text: str, out: Path | None, name: str) -> None:
    if out is None:
        click.echo(text, nl=not text.endswith("\n"))
    else:
        target = out / name
        _write_atomic(target, text if text.endswith("\n") else text + "\n")
        click.echo(str(target), err=True)


def _csv(header: list[str], rows) -> str:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_num(v) if isinstance(v, (float, np.floating)) else str(v) for v in row))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# SVG


def svg_polylines(polylines, *, arrows=()) -> str:
    """Plain SVG 1.1 with the given 2-D polylines fitted into a fixed square viewBox."""
    pts = [np.asarray(p, dtype=float) for p in polylines if len(p)]
    for a, b in arrows:
        pts.append(np.array([a, b], dtype=float))
    allp = np.vstack(pts)
    lo, hi = allp.min(axis=0), allp.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    margin = 20
    scale = (SVG_SIZE - 2 * margin) / span
    center = (lo + hi) / 2

    def tx(p):
        x = SVG_SIZE / 2 + (p[0] - center[0]) * scale
        y = SVG_SIZE / 2 - (p[1] - center[1]) * scale
        return f"{x:.3f},{y:.3f}"

    parts = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
    ]
    for p in polylines:
        p = np.asarray(p, dtype=float)
        if len(p) == 0:
            continue
        d = "M " + " L ".join(tx(q) for q in p)
        parts.append(f'<path d="{d}" fill="none" stroke="black" stroke-width="1"/>')
    for a, b in arrows:
        parts.append(f'<path d="M {tx(a)} L {tx(b)}" fill="none" stroke="red" stroke-width="1.5"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# ---------------------------------------------------------------------------
# records


@dataclass
class Settings:
    tol_ode: float = ODE_RTOL
    tol_quad: float = QUAD_RTOL
    scan_max: float = DEFAULT_SCAN[0]
    out: Path | None = None
    fmt: str = "json"

    def provenance(self, **grid) -> dict:
        return {
            "tool": "halfelastica",
            "version": __version__,
            "tolerances": {"ode_rtol": self.tol_ode, "quad_rtol": self.tol_quad, "scan_max": self.scan_max},
            "grid": grid,
        }


def _sample_rows(curve: CurveSamples) -> list[list[float]]:
    g = curve.gamma
    cols = [curve.s, curve.mu, curve.mudot, g[:, 0], g[:, 1], g[:, 2], curve.theta, curve.rho, curve.height]
    return np.column_stack(cols).tolist()


def _meta(p: Parameters, spec: ClosureSpec | None, energy: float) -> dict:
    return {
        "lambda": p.lam,
        "e1": p.e1,
        "xi": p.xi,
        "omega": period_omega(p),
        "region": p.region.value,
        "m": spec.m if spec else None,
        "n": spec.n if spec else None,
        "q": spec.q if spec else None,
        "psi_hat": psi_hat(p),
        "energy": energy,
    }


def curve_record(p: Parameters, spec: ClosureSpec | None, periods: float, step: float, st: Settings):
    curve = synthesize_curve(p, periods, step, rtol=st.tol_ode, atol=st.tol_ode / 10)
    energy = bending_energy(p, 1) * periods
    record = {
        "schema": SCHEMA,
        "kind": "closure" if spec else "curve",
        "meta": _meta(p, spec, energy),
        "samples": {"columns": SAMPLE_COLUMNS, "rows": _sample_rows(curve)},
        "invariants": invariant_report(p, spec).as_dict() if spec else None,
        "provenance": st.provenance(periods=periods, step=step, start=0.0),
    }
    return record, curve


def _projection_svg(curve: CurveSamples) -> str:
    return svg_polylines([curve.gamma[:, 1:]])


def _phase_svg(p: Parameters) -> str:
    return svg_polylines([phase_curve(p, 400)])


def _write_record(record: dict, curve: CurveSamples | None, st: Settings, stem: str) -> None:
    if st.fmt == "csv":
        _emit(_csv(SAMPLE_COLUMNS, record["samples"]["rows"]), st.out, f"{stem}.csv")
    else:
        _emit(dumps(record), st.out, f"{stem}.json")
    if st.out is not None and curve is not None:
        _write_atomic(st.out / f"{stem}_projection.svg", _projection_svg(curve))
        _write_atomic(st.out / f"{stem}_phase.svg", _phase_svg(curve.params))


# ---------------------------------------------------------------------------
# click plumbing


def common_options(fn):
    @click.option("--tol-ode", type=float, default=ODE_RTOL, show_default=True, help="Relative ODE tolerance.")
    @click.option(
        "--tol-quad",
        type=float,
        default=QUAD_RTOL,
        show_default=True,
        help="Tolerance for quadrature and numeric re-checks.",
    )
    @click.option("--scan-max", type=float, default=DEFAULT_SCAN[0], show_default=True, help="Upper e1 of the closure scan.")
    @click.option("--out", type=click.Path(file_okay=False, path_type=Path), default=None, help="Output directory.")
    @click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
    @functools.wraps(fn)
    def wrapper(*args, tol_ode, tol_quad, scan_max, out, fmt, **kwargs):
        st = Settings(tol_ode=tol_ode, tol_quad=tol_quad, scan_max=scan_max, out=out, fmt=fmt)
        try:
            return fn(*args, st=st, **kwargs)
        except (AdmissibilityError, InvalidSpec, PlanarDomainError, EllipticDomainError) as exc:
            raise DomainFailure(str(exc)) from exc

    return wrapper


@click.group()
@click.version_option(__version__, prog_name="halfelastica")
def main():
    """Closed 1/2-elasticae on the unit sphere."""


def _closure_params(lam, m, n, exceptional, index, st):
    spec = ClosureSpec(m, n)
    if exceptional:
        roots = solve_exceptional(spec, tol=min(1e-10, st.tol_quad * 1e3))
    else:
        if lam is None:
            raise click.UsageError("--lambda is required unless --exceptional is given")
        roots = solve_closure(lam, spec, (st.scan_max, DEFAULT_SCAN[1]), tol=min(1e-10, st.tol_quad * 1e3))
    if not roots:
        where = "lambda range" if exceptional else "scan range"
        raise NotFound(f"no closure root in {where}")
    if index >= len(roots):
        raise NotFound(f"only {len(roots)} closure root(s) found")
    return spec, roots[index].params, roots


@main.command()
@click.option("--lambda", "lam", type=float, default=None, help="Multiplier.")
@click.option("--m", type=int, required=True)
@click.option("--n", type=int, required=True)
@click.option("--exceptional", is_flag=True, help="Solve for the multiplier on the exceptional locus.")
@click.option("--index", type=int, default=0, show_default=True, help="Which root, in ascending e1.")
@click.option("--step", type=float, default=1e-2, show_default=True)
@common_options
def close(lam, m, n, exceptional, index, step, st):
    """Find a closed curve with characteristic number m/n and export it."""
    spec, p, roots = _closure_params(lam, m, n, exceptional, index, st)
    record, curve = curve_record(p, spec, n, step, st)
    record["meta"]["roots"] = [r.params.e1 for r in roots]
    _write_record(record, curve, st, f"close_{_tag(p.lam)}_{m}_{n}")


def _tag(x: float) -> str:
    return format(x, ".6g").replace("-", "m").replace(".", "p")


@main.command()
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--e1", type=float, required=True)
@click.option("--periods", type=float, default=1.0, show_default=True)
@click.option("--step", type=float, default=1e-2, show_default=True)
@common_options
def curve(lam, e1, periods, step, st):
    """Export an open curve for admissible (lambda, e1)."""
    p = make_parameters(lam, e1)
    record, samples = curve_record(p, None, periods, step, st)
    _write_record(record, samples, st, f"curve_{_tag(lam)}_{_tag(e1)}")


@main.command("period-map")
@click.option("--lambda", "lam", type=float, required=True)
@click.option("--e1-min", type=float, required=True)
@click.option("--e1-max", type=float, required=True)
@click.option("--steps", type=int, default=100, show_default=True)
@click.option("--spacing", type=click.Choice(["log", "linear"]), default="log", show_default=True)
@common_options
def period_map(lam, e1_min, e1_max, steps, spacing, st):
    """Tabulate the jump and its regularization over a range of e1."""
    et = eta(lam)
    if not (et < e1_min < e1_max) or steps < 2:
        raise DomainFailure(f"need eta={et!r} < e1-min < e1-max and steps >= 2")
    if spacing == "log":
        grid = et + np.geomspace(e1_min - et, e1_max - et, steps)
    else:
        grid = np.linspace(e1_min, e1_max, steps)
    rows = period_map_table(lam, grid)
    if st.fmt == "json":
        text = dumps({"schema": SCHEMA, "kind": "period-map", "lambda": lam, "columns": ["e1", "psi", "psi_hat", "region"], "rows": [list(r) for r in rows]})
        _emit(text, st.out, f"period_map_{_tag(lam)}.json")
    else:
        _emit(_csv(["e1", "psi", "psi_hat", "region"], rows), st.out, f"period_map_{_tag(lam)}.csv")


@main.command()
@click.option("--e1", type=float, required=True)
@click.option("--e2", type=float, required=True)
@click.option("--periods", type=float, default=3.0, show_default=True)
@click.option("--step", type=float, default=1e-2, show_default=True)
@click.option("--branch", is_flag=True, help="Tabulate the branch functions h+ and h- instead.")
@click.option("--points", type=int, default=60, show_default=True, help="Rows of the branch table.")
@common_options
def planar(e1, e2, periods, step, branch, points, st):
    """Planar control case: translation period, displacement or branch functions."""
    if branch:
        if not e1 > 0 > e2:
            raise DomainFailure("the branch table needs e1 > 0 > e2")
        ms = e1 * np.geomspace(1e-3, 1.0, points)
        rows = [(m, planar_h_branch(m, e1, e2, "+"), planar_h_branch(m, e1, e2, "-")) for m in ms]
        if st.fmt == "csv":
            _emit(_csv(["m", "h_plus", "h_minus"], rows), st.out, f"planar_branch_{_tag(e1)}_{_tag(e2)}.csv")
        else:
            rec = {"schema": SCHEMA, "kind": "planar-branch", "e1": e1, "e2": e2, "columns": ["m", "h_plus", "h_minus"], "rows": [list(r) for r in rows]}
            _emit(dumps(rec), st.out, f"planar_branch_{_tag(e1)}_{_tag(e2)}.json")
        if st.out is not None:
            clip = [(h, m) for m, h, _ in rows if abs(h) < 5] + [(h, m) for m, _, h in rows[::-1] if abs(h) < 5]
            _write_atomic(st.out / f"planar_branch_{_tag(e1)}_{_tag(e2)}.svg", svg_polylines([clip]))
        return
    pp = PlanarParams.from_roots(e1, e2)
    if not pp.convex:
        raise DomainFailure("curve export needs e1 > e2 > 0")
    om = planar_period(e1, e2)
    s, g = planar_curve(pp, periods * om, step, rtol=st.tol_ode, atol=st.tol_ode / 10)
    disp = planar_displacement(e1, e2)
    rec = {
        "schema": SCHEMA,
        "kind": "planar",
        "meta": {"e1": e1, "e2": e2, "lambda": pp.lam, "d": pp.d, "omega": om, "displacement": disp.tolist()},
        "samples": {"columns": ["s", "x", "y"], "rows": np.column_stack([s, g]).tolist()},
        "provenance": st.provenance(periods=periods, step=step, start=0.0),
    }
    stem = f"planar_{_tag(e1)}_{_tag(e2)}"
    if st.fmt == "csv":
        _emit(_csv(["s", "x", "y"], rec["samples"]["rows"]), st.out, f"{stem}.csv")
    else:
        _emit(dumps(rec), st.out, f"{stem}.json")
    if st.out is not None:
        _write_atomic(st.out / f"{stem}.svg", svg_polylines([g], arrows=[(g[0], g[0] + disp)]))


# ---------------------------------------------------------------------------
# catalog


@dataclass(frozen=True)
class Fixture:
    name: str
    lam: float | None
    m: int
    n: int
    expected: dict = field(default_factory=dict)


CATALOG = (
    Fixture("neg_2_5", 1.1, 2, 5, {"region": "NegativeType", "linking_number": 3, "ordinary_double_points": 10}),
    Fixture(
        "exc_4_9",
        None,
        4,
        9,
        {"region": "Exceptional", "lambda_2dp": -0.11, "turning_number": 5, "ordinary_double_points": 0, "pole_multiplicity": 9},
    ),
    Fixture(
        "exc_2_9",
        None,
        2,
        9,
        {"region": "Exceptional", "lambda_2dp": -0.45, "turning_number": 7, "ordinary_double_points": 18, "pole_multiplicity": 9},
    ),
    Fixture("pos_3_8", -0.5, 3, 8, {"region": "PositiveType", "linking_number": -3, "ordinary_double_points": 24}),
    Fixture(
        "pos_3_11",
        -0.5,
        3,
        11,
        {"region": "PositiveType", "linking_number": -3, "ordinary_double_points": 33, "tangential_double_points": 11},
    ),
    Fixture("pos_2_9", -0.5, 2, 9, {"region": "PositiveType", "linking_number": -2, "ordinary_double_points": 36, "k": 1}),
    Fixture("pos_1_3", -1.1, 1, 3, {"region": "PositiveType", "symmetry_order": 3, "linking_number": -1}),
    # regularized jump 2 pi / 3 at lam near -0.27
    Fixture(
        "exc_1_3",
        None,
        1,
        3,
        {"region": "Exceptional", "lambda_2dp": -0.27, "symmetry_order": 3, "turning_number": 2, "pole_multiplicity": 3, "ordinary_double_points": 0},
    ),
    Fixture("neg_1_3", 0.1, 1, 3, {"region": "NegativeType", "symmetry_order": 3, "linking_number": 2, "ordinary_double_points": 3}),
)


def run_fixture(fx: Fixture, st: Settings):
    """(params, report dict, list of (key, expected, computed, ok))."""
    spec = ClosureSpec(fx.m, fx.n)
    if fx.lam is None:
        roots = solve_exceptional(spec)
        if fx.name == "exc_1_3":
            roots = [r for r in roots if round(r.params.lam, 2) == -0.27] or roots
    else:
        roots = solve_closure(fx.lam, spec, (st.scan_max, DEFAULT_SCAN[1]))
    if not roots:
        return None, None, [("closure", "found", "none", False)]
    p = roots[0].params
    report = invariant_report(p, spec).as_dict()
    computed = dict(report)
    computed["lambda_2dp"] = round(p.lam, 2)
    checks = [(k, v, computed.get(k), computed.get(k) == v) for k, v in fx.expected.items()]
    return p, report, checks


@main.command()
@click.option("--step", type=float, default=1e-2, show_default=True)
@common_options
def catalog(step, st):
    """Run the built-in fixtures and compare integer invariants with expected values."""
    lines = [f"{'fixture':<12} {'key':<26} {'expected':>10} {'computed':>10}  status"]
    failed = False
    for fx in CATALOG:
        p, report, checks = run_fixture(fx, st)
        for key, exp, got, ok in checks:
            failed |= not ok
            lines.append(f"{fx.name:<12} {key:<26} {exp!s:>10} {got!s:>10}  {'ok' if ok else 'MISMATCH'}")
        if p is not None and st.out is not None:
            record, curve = curve_record(p, ClosureSpec(fx.m, fx.n), fx.n, step, st)
            record["fixture"] = fx.name
            _write_atomic(st.out / f"{fx.name}.json", dumps(record) + "\n")
            _write_atomic(st.out / f"{fx.name}_projection.svg", _projection_svg(curve))
            _write_atomic(st.out / f"{fx.name}_phase.svg", _phase_svg(p))
    summary = "\n".join(lines) + "\n"
    if st.out is not None:
        _write_atomic(st.out / "summary.txt", summary)
    click.echo(summary, nl=False)
    if failed:
        raise Mismatch("integer invariants differ from the expected values")


# ---------------------------------------------------------------------------
# verify


def verify_record(record: dict, tol: float = 1e-6) -> list[str]:
    """Re-check an exported record; returns the failed checks (empty when it passes)."""
    problems = []
    if record.get("schema") != SCHEMA:
        return [f"unsupported schema {record.get('schema')!r}"]
    kind = record.get("kind")
    if kind == "planar":
        meta = record["meta"]
        e1, e2 = meta["e1"], meta["e2"]
        if abs(meta["omega"] - planar_period(e1, e2)) > tol:
            problems.append("planar period")
        if np.max(np.abs(np.asarray(meta["displacement"]) - planar_displacement(e1, e2))) > tol:
            problems.append("planar displacement")
        return problems
    if kind not in ("curve", "closure"):
        return [f"unknown record kind {kind!r}"]
    meta = record["meta"]
    p = make_parameters(meta["lambda"], meta["e1"])
    if abs(meta["xi"] - p.xi) > tol * max(1, p.xi):
        problems.append("xi")
    if abs(meta["omega"] - period_omega(p)) > tol * max(1, meta["omega"]):
        problems.append("omega")
    if meta["region"] != p.region.value:
        problems.append("region")
    ph = psi_hat(p)
    if abs(meta["psi_hat"] - ph) > tol:
        problems.append("psi_hat")
    if abs(meta["energy"] - bending_energy(p, 1) * record["provenance"]["grid"]["periods"]) > tol * max(1, abs(meta["energy"])):
        problems.append("energy")
    cols = record["samples"]["columns"]
    data = np.asarray(record["samples"]["rows"], dtype=float)
    col = {c: data[:, i] for i, c in enumerate(cols)}
    if np.any(np.diff(col["s"]) <= 0):
        problems.append("samples not sorted")
    g = np.column_stack([col["gamma_x"], col["gamma_y"], col["gamma_z"]])
    if np.max(np.abs(np.linalg.norm(g, axis=1) - 1)) > 1e-8:
        problems.append("unit sphere")
    if np.max(np.abs(col["height"] ** 2 + col["rho"] ** 2 - 1)) > 1e-8:
        problems.append("cylindrical split")
    lo, hi = 1 / (2 * p.xi * p.e1), 1 / (2 * p.xi * p.e2)
    if col["height"].min() < lo - tol or col["height"].max() > hi + tol:
        problems.append("slab")
    resid = col["mudot"] ** 2 + col["mu"] ** 2 * p.Q(col["mu"])
    if np.max(np.abs(resid)) > tol:
        problems.append("conservation")
    grid = record["provenance"]["grid"]
    expect_span = grid["periods"] * period_omega(p)
    if abs((col["s"][-1] - col["s"][0]) - expect_span) > 1e-9 * max(1.0, expect_span):
        problems.append("grid span")
    if kind == "closure":
        spec = ClosureSpec(int(meta["m"]), int(meta["n"]))
        if np.linalg.norm(g[-1] - g[0]) > tol:
            problems.append("closure gap")
        try:
            fresh = invariant_report(p, spec).as_dict()
        except NotClosed:
            problems.append("closure residual")
        else:
            stored = record.get("invariants") or {}
            for key, val in fresh.items():
                if isinstance(val, float) or val is None:
                    continue
                if stored.get(key) != val:
                    problems.append(f"invariant {key}")
    return problems


@main.command()
@click.argument("path", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--tol", type=float, default=1e-6, show_default=True)
def verify(path, tol):
    """Re-check the numeric invariants of an exported JSON record."""
    try:
        record = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DomainFailure(f"not a JSON record: {exc}") from exc
    try:
        problems = verify_record(record, tol)
    except (AdmissibilityError, InvalidSpec, PlanarDomainError, KeyError, TypeError) as exc:
        raise DomainFailure(f"malformed record: {exc}") from exc
    if problems:
        raise Mismatch("failed checks: " + ", ".join(problems))
    click.echo("ok")


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
