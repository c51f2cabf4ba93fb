"""Command-line front end.

Exit status: 0 when every asserted inequality holds within tolerance, 1 when
one is violated, 2 for configuration or usage errors, 3 when a solver or
geometric precondition fails.
"""
from __future__ import annotations

import argparse
import csv
import datetime as _dt
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import _backend
from .capacity import ExteriorGrid, SolverError, capacity_estimates, pfs_lower_bound, solve_mixed_bvp
from .config import ConfigError, Scenario, expand_sweep, from_dict, parse_config
from .cone import ConeSpec, DomainError
from .flow import FlowDiverged, StepRejected, run
from .mass import ConformalFactorField, HalfSchwarzschild, penrose_check
from .surface import CurvatureError, RadialGraph, functionals, read_profile_csv

VERBS = {"cap-solve": "capacity", "imcf-run": "imcf", "penrose-check": "penrose", "sweep": "sweep"}


class ScenarioFailure(RuntimeError):
    pass


def _plain(x):
    if isinstance(x, dict):
        return {k: _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, (np.bool_, bool)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def verdict(margin: float, tol: float) -> str:
    if abs(margin) <= tol:
        return "equality within tol"
    return "holds" if margin > 0 else "violated"


def build_graph(sc: Scenario) -> RadialGraph:
    cone = ConeSpec.from_degrees(sc.cone.n, sc.cone.theta0_deg)
    s, m = sc.surface, sc.grid.m_theta
    if s.type == "cap":
        return RadialGraph.cap(cone, s.r, m)
    if s.type == "perturbed_cap":
        return RadialGraph.perturbed_cap(cone, s.r, s.eps, s.mode, m)
    return read_profile_csv(s.path, cone)


def run_capacity(sc: Scenario) -> tuple[dict, dict]:
    graph = build_graph(sc)
    grid = ExteriorGrid(graph, sc.grid.m_s, sc.grid.m_theta, sc.grid.s_max)
    fld = solve_mixed_bvp(grid)
    res = capacity_estimates(fld)
    n, alpha = graph.cone.n, graph.cone.alpha
    fn = functionals(graph)
    cap = res.cap_extrapolated
    tol = sc.tolerances.slack + abs(res.cap_extrapolated - res.cap_flux)
    mean_curvature_bound = fn.total_mean_curvature / ((n - 1) * alpha)
    volume_bound = (fn.volume / graph.cone.unit_sector_volume) ** ((n - 2) / n)
    h = fn.total_mean_curvature / fn.area ** ((n - 2) / (n - 1))
    margins = {
        "capacity_vs_mean_curvature": mean_curvature_bound - cap,
        "capacity_vs_volume": cap - volume_bound,
        "h_vs_cone_limit": h - graph.cone.h_limit,
    }
    out = {
        **res.as_dict(),
        "area": fn.area,
        "volume": fn.volume,
        "total_mean_curvature": fn.total_mean_curvature,
        "min_H": fn.min_H,
        "mean_curvature_bound": mean_curvature_bound,
        "volume_bound": volume_bound,
        "levelset_bound": pfs_lower_bound(fld),
        "h": h,
        "h_limit": graph.cone.h_limit,
        "tolerance": tol,
        "iterations": fld.iterations,
        "s_max": grid.s_max,
    }
    verdicts = {k: verdict(v, tol) for k, v in margins.items()}
    out.update({f"margin_{k}": v for k, v in margins.items()})
    return out, {"verdicts": verdicts, "field": fld}


def run_imcf(sc: Scenario) -> tuple[dict, dict]:
    graph = build_graph(sc)
    n = graph.cone.n
    tr = run(graph, sc.flow.t_end, sc.flow.dt)
    t, hcol, I = tr.column("t"), tr.column("h"), tr.column("I")
    umb = tr.column("umbilicity")
    slack = sc.tolerances.h_slack
    dh = tr.h_increments()
    growth = I - I[0] * np.exp((n - 2) / (n - 1) * t) * (1 + sc.tolerances.slack)
    h_lim = graph.cone.h_limit
    out = {
        "h_initial": hcol[0],
        "h_final": hcol[-1],
        "h_limit": h_lim,
        "h_final_rel_err": abs(hcol[-1] - h_lim) / h_lim,
        "max_h_increment": float(dh.max()) if dh.size else 0.0,
        "max_exponential_excess": float(growth.max()),
        "area_ratio_max_err": float(tr.column("area_ratio_err").max()),
        "umbilicity_initial": umb[0],
        "umbilicity_final": umb[-1],
        "u_variation_initial": float(np.ptp(graph.u)),
        "u_variation_final": float(np.ptp(tr.final.graph.u)),
        "r_inf": tr.rescaled_limit,
        "r_inf_expected": tr.rescaled_limit_expected,
        "samples": len(tr.samples),
        **{k: v for k, v in tr.metadata.items() if k not in ("n",)},
    }
    verdicts = {
        "h_monotone": "holds" if bool(np.all(dh <= slack)) else "violated",
        "exponential_bound": "holds" if bool(np.all(growth <= 0)) else "violated",
        "h_vs_cone_limit": verdict(hcol[0] - h_lim, sc.tolerances.slack),
    }
    return out, {"verdicts": verdicts, "trace": tr}


def run_penrose(sc: Scenario) -> tuple[dict, dict]:
    sw = sc.schwarzschild
    model = HalfSchwarzschild(sc.cone.n, sw.mass)
    grid = model.grid(sc.grid.m_s, sc.grid.m_theta, sc.grid.s_max)
    factor = model if sw.factor_mass is None else HalfSchwarzschild(sc.cone.n, sw.factor_mass)
    fld = ConformalFactorField.from_function(grid, factor.u)
    rep = penrose_check(fld, rel_tol=sc.tolerances.relative, admissible_tol=sc.tolerances.admissible)
    d = rep.to_dict()
    verdicts = {k[len("verdict_"):]: v for k, v in d.items() if k.startswith("verdict_")}
    out = {k: v for k, v in d.items() if not k.startswith("verdict_") and k != "violated"}
    out["horizon_radius"] = model.horizon_radius
    return out, {"verdicts": verdicts}


RUNNERS = {"capacity": run_capacity, "imcf": run_imcf, "penrose": run_penrose}


def _execute(sc: Scenario) -> tuple[dict, dict]:
    try:
        return RUNNERS[sc.kind](sc)
    except CurvatureError as exc:
        raise ScenarioFailure(f"{sc.kind} scenario '{sc.output}': {exc}") from exc
    except (DomainError, SolverError, StepRejected, FlowDiverged) as exc:
        raise ScenarioFailure(f"{sc.kind} scenario '{sc.output}': {exc}") from exc


def _sweep_point(raw: dict) -> dict:
    sc = from_dict(raw)
    try:
        out, extra = _execute(sc)
    except ScenarioFailure as exc:
        return {"error": str(exc), "violated": False, "failed": True}
    row = {k: v for k, v in _plain(out).items() if isinstance(v, (int, float, str, bool))}
    row.update({f"verdict_{k}": v for k, v in extra["verdicts"].items()})
    row["violated"] = any(v == "violated" for v in extra["verdicts"].values())
    row["failed"] = False
    return row


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n")


def run_scenario(sc: Scenario, out_dir: Path, timestamp: bool = True) -> int:
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = out_dir / Path(sc.output).name
    doc = {"scenario": sc.to_dict(), "backend": _backend.BACKEND}
    if timestamp:
        doc["generated_at"] = _dt.datetime.now(_dt.timezone.utc).isoformat()
    if sc.kind == "sweep":
        points = expand_sweep(sc)
        with ProcessPoolExecutor(max_workers=min(sc.sweep.workers, len(points))) as pool:
            rows = list(pool.map(_sweep_point, [p.to_dict() for _, p in points]))
        params = sorted(points[0][0])
        for (vals, _), row in zip(points, rows):
            row.update({f"param_{k}": v for k, v in vals.items()})
        pcols = [f"param_{k}" for k in params]
        others = sorted({k for r in rows for k in r} - set(pcols))
        with open(f"{prefix}_sweep.csv", "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=pcols + others, restval="")
            wr.writeheader()
            for r in rows:
                wr.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in r.items()})
        violated = any(r["violated"] for r in rows)
        failed = any(r["failed"] for r in rows)
        doc.update({"points": len(rows), "violated": violated, "failed_points": sum(r["failed"] for r in rows)})
        _write_json(Path(f"{prefix}.json"), doc)
        return 1 if violated else (3 if failed else 0)

    out, extra = _execute(sc)
    violated = any(v == "violated" for v in extra["verdicts"].values())
    doc.update({"result": out, "verdicts": extra["verdicts"], "violated": violated})
    if sc.kind == "imcf":
        extra["trace"].to_csv(f"{prefix}_trace.csv")
    if sc.kind == "capacity" and sc.write_field_csv:
        extra["field"].to_csv(f"{prefix}_field.csv")
    _write_json(Path(f"{prefix}.json"), doc)
    return 1 if violated else 0


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="conecap", description="Capacity, IMCF and mass checks in convex cones.")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        sp = sub.add_parser(verb)
        sp.add_argument("config", help="JSON scenario file")
        sp.add_argument("--out-dir", default=".", help="directory for reports (default: current)")
        sp.add_argument("--no-timestamp", action="store_true", help="omit generated_at for byte-identical output")
        sp.add_argument("--grid-scale", type=float, default=1.0, help="multiply both grid resolutions")
    return p


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        print(f"conecap: cannot read {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        sc = parse_config(text)
        if not args.grid_scale > 0:
            raise ConfigError("--grid-scale: must be positive")
        want = VERBS[args.verb]
        if sc.kind != want:
            raise ConfigError(f"kind: '{args.verb}' runs '{want}' scenarios, config has '{sc.kind}'")
        sc = sc.scaled(args.grid_scale)
    except ConfigError as exc:
        print(f"conecap: {args.config}: {exc}", file=sys.stderr)
        return 2
    try:
        status = run_scenario(sc, Path(args.out_dir), timestamp=not args.no_timestamp)
    except ScenarioFailure as exc:
        print(f"conecap: {exc}", file=sys.stderr)
        return 3
    if status == 1:
        print("conecap: an asserted inequality is violated; see the report", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
