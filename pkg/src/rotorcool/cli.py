"""Command-line front end.

Units on the command line follow the shaft test conditions (1/min, l/min,
degC); everything is converted to SI once, inside the solver types.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

from rotorcool import __version__
from rotorcool.analysis import (
    BASELINE,
    SweepError,
    SweepRow,
    SweepSpec,
    design_scan,
    improvement_ratio,
    reference_grid,
    rank_models,
    row_to_record,
    rows_to_csv,
    run_sweep,
    scan_to_csv,
    sweep_summary,
)
from rotorcool.geometry import (
    PROFILE_DEPTH_RANGE_MM,
    GeometryError,
    build_network,
    calibrate_fill_fraction,
    describe,
    preset,
    spec_from_dict,
)
from rotorcool.properties import DEFAULT_FLUID, FluidPropertyTable, PropertyTableError, consistency_check, fluid_at
from rotorcool.solver import OperatingPoint, SolverConfig, SolverError, grid_convergence

log = logging.getLogger("rotorcool")

COMMANDS = (
    "simulate", "sweep", "compare", "props", "convergence",
    "design-scan", "config-show", "geometry-describe",
)
OUTPUT_DIR_ENV = "ROTORCOOL_OUTPUT_DIR"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    model: Optional[int] = None
    rpm: float = BASELINE["rpm"]
    flow_lpm: float = BASELINE["flow_lpm"]
    inlet_temp_c: float = BASELINE["inlet_temp_c"]
    wall_temp_c: float = 100.0
    segments: int = 200
    config_path: Optional[Path] = None
    out: Optional[Path] = None
    format: str = "csv"
    verbosity: int = 0
    workers: int = 1
    temp_c: Optional[float] = None
    counts: tuple[int, ...] = (100, 200, 400)
    teeth: tuple[int, ...] = ()
    depths: tuple[float, ...] = ()
    fills: tuple[float, ...] = ()
    solver: SolverConfig = field(default_factory=SolverConfig)
    sweep: Optional[SweepSpec] = None
    geometry: dict = field(default_factory=dict)
    fluid: FluidPropertyTable = DEFAULT_FLUID


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="rotorcool", description="Rotor-shaft coolant thermal-hydraulics.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--model", type=int, choices=(1, 2, 3, 4))
    p.add_argument("--rpm", type=float, help="rotational speed [1/min]")
    p.add_argument("--flow-lpm", type=float, help="inlet flow [l/min] (default 5)")
    p.add_argument("--inlet-temp-c", type=float, help="inlet temperature [degC] (default 80)")
    p.add_argument("--wall-temp-c", type=float, default=100.0, help="fixed wall temperature [degC]")
    p.add_argument("--segments", type=int, default=200, help="axial segments in the heated run")
    p.add_argument("--config", type=Path, help="JSON configuration file")
    p.add_argument("--out", type=Path, help="output file (CSV or JSON)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1, help="sweep worker processes")
    p.add_argument("--temp-c", type=float, help="props: evaluation temperature [degC]")
    p.add_argument("--counts", type=int, nargs="+", help="convergence: segment counts")
    p.add_argument("--teeth", type=int, nargs="+", help="design-scan: tooth counts")
    p.add_argument("--depths", type=float, nargs="+", help="design-scan: profile depths [mm]")
    p.add_argument("--fills", type=float, nargs="+", help="design-scan: tooth fill fractions")
    p.add_argument("-v", "--verbose", action="count", default=0)
    return p


def _load_config(path: Path) -> dict:
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(data, dict):
        raise UsageError(f"{path}: top level must be an object")
    unknown = set(data) - {"solver", "sweep", "geometry", "properties", "operating_point"}
    if unknown:
        raise UsageError(f"{path}: unknown config sections {sorted(unknown)}")
    return data


def parse_args(argv: Sequence[str]) -> RunConfig:
    """Parse and type-check everything before any solve runs.

    argparse exits with status 2 on malformed flags; semantic problems in the
    config file raise :class:`UsageError`.
    """
    ns = _build_parser().parse_args(list(argv))
    rc = RunConfig(command=ns.command, verbosity=ns.verbose, format=ns.format, workers=ns.workers)
    rc.model = ns.model
    rc.wall_temp_c = ns.wall_temp_c
    rc.segments = ns.segments
    rc.config_path = ns.config
    rc.temp_c = ns.temp_c

    op_overrides = {}
    if ns.config is not None:
        cfg = _load_config(ns.config)
        try:
            rc.solver = SolverConfig.from_dict(cfg.get("solver", {}))
            if "sweep" in cfg:
                rc.sweep = SweepSpec.from_dict(cfg["sweep"])
            rc.geometry = dict(cfg.get("geometry", {}))
            props = cfg.get("properties")
            if isinstance(props, str):
                rc.fluid = FluidPropertyTable.from_json(ns.config.parent / props)
            elif props is not None:
                rc.fluid = FluidPropertyTable.from_records(props)
            op_overrides = dict(cfg.get("operating_point", {}))
        except (ValueError, TypeError, SweepError, PropertyTableError) as exc:
            raise UsageError(f"{ns.config}: {exc}") from None
        unknown = set(op_overrides) - {"rpm", "flow_lpm", "inlet_temp_c", "wall_temp_c"}
        if unknown:
            raise UsageError(f"{ns.config}: unknown operating_point keys {sorted(unknown)}")

    rc.rpm = ns.rpm if ns.rpm is not None else float(op_overrides.get("rpm", BASELINE["rpm"]))
    rc.flow_lpm = ns.flow_lpm if ns.flow_lpm is not None else float(op_overrides.get("flow_lpm", BASELINE["flow_lpm"]))
    rc.inlet_temp_c = (
        ns.inlet_temp_c if ns.inlet_temp_c is not None else float(op_overrides.get("inlet_temp_c", BASELINE["inlet_temp_c"]))
    )
    if "wall_temp_c" in op_overrides and ns.wall_temp_c == 100.0:
        rc.wall_temp_c = float(op_overrides["wall_temp_c"])

    if ns.counts:
        rc.counts = tuple(ns.counts)
    rc.teeth = tuple(ns.teeth or ())
    rc.depths = tuple(ns.depths or ())
    rc.fills = tuple(ns.fills or ())

    if ns.out is not None:
        out = ns.out
        env_dir = os.environ.get(OUTPUT_DIR_ENV)
        if env_dir and not out.is_absolute():
            out = Path(env_dir) / out
        rc.out = out

    if rc.out is not None and not _writable(rc.out):
        raise UsageError(f"output path {rc.out} is not writable")
    if rc.segments < 10:
        raise UsageError("--segments must be >= 10")
    if rc.workers < 1:
        raise UsageError("--workers must be >= 1")
    try:
        OperatingPoint(rc.rpm, rc.flow_lpm, rc.inlet_temp_c, rc.wall_temp_c)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if rc.command == "design-scan":
        if not (rc.teeth and rc.depths and rc.fills):
            raise UsageError("design-scan needs --teeth, --depths and --fills")
        lo, hi = PROFILE_DEPTH_RANGE_MM
        if any(not lo <= d <= hi for d in rc.depths):
            raise UsageError(f"--depths must lie in [{lo:g}, {hi:g}] mm")
    if rc.geometry and "model_id" in rc.geometry and rc.model is not None and rc.geometry["model_id"] != rc.model:
        raise UsageError("geometry override model_id disagrees with --model")
    return rc


def _writable(path: Path) -> bool:
    if path.is_dir():
        return False
    if path.exists():
        return os.access(path, os.W_OK)
    parent = path.parent.resolve()
    while not parent.exists():
        parent = parent.parent
    return parent.is_dir() and os.access(parent, os.W_OK)


# -- output -------------------------------------------------------------------


def atomic_write(path: Path, text: str) -> None:
    """Write via a temp file in the target directory, then rename over ``path``."""
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    directory.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=directory)
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise


def _sig4(x: float) -> str:
    return format(x, ".4g")


def summary_line(row: SweepRow) -> str:
    return (
        f"model {row.model} @ {row.rpm:g} 1/min, {row.flow_lpm:g} l/min, {row.inlet_temp_c:g} degC: "
        f"outlet {_sig4(row.outlet_temp_c)} degC, heat {_sig4(row.heat_rate_w)} W, "
        f"max pressure {_sig4(row.max_pressure_pa / 1e5)} bar, max velocity {_sig4(row.max_velocity_m_s)} m/s"
        + ("" if row.converged else " [NOT CONVERGED]")
    )


def render_rows(rows: Sequence[SweepRow], fmt: str, extra: Optional[dict] = None) -> str:
    if fmt == "csv":
        return rows_to_csv(rows)
    doc = {"rows": [row_to_record(r) for r in rows]}
    if extra:
        doc.update(extra)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def emit(text: str, out: Optional[Path]) -> None:
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)
        log.info("wrote %s", out)


# -- commands -----------------------------------------------------------------


def _networks(rc: RunConfig, models: Sequence[int]):
    nets = {}
    for m in models:
        spec = preset(m)
        if rc.geometry and rc.geometry.get("model_id", m) == m:
            spec = spec_from_dict({k: v for k, v in rc.geometry.items() if k != "model_id"}, spec)
        if spec.has_teeth:
            spec = calibrate_fill_fraction(spec)
        nets[m] = build_network(spec, rc.segments)
    return nets


def _single_spec(rc: RunConfig, models: Sequence[int]) -> SweepSpec:
    return SweepSpec(
        models=tuple(models), speeds=(rc.rpm,), flows=(rc.flow_lpm,), inlet_temps=(rc.inlet_temp_c,),
        wall_temp_c=rc.wall_temp_c, n_axial_segments=rc.segments, allow_out_of_range=True,
    )


def cmd_simulate(rc: RunConfig) -> None:
    model = rc.model or 1
    spec = _single_spec(rc, (model,))
    rows = run_sweep(spec, rc.solver, fluid=rc.fluid, networks=_networks(rc, (model,)))
    print(summary_line(rows[0]))
    if rc.out is not None:
        emit(render_rows(rows, rc.format), rc.out)


def cmd_sweep(rc: RunConfig) -> None:
    spec = rc.sweep
    if spec is None:
        spec = reference_grid((rc.model,) if rc.model else (1, 2, 3, 4), rc.segments)
    nets = {m: _networks_n(rc, m, spec.n_axial_segments) for m in spec.axis_models}
    rows = run_sweep(spec, rc.solver, workers=rc.workers, fluid=rc.fluid, networks=nets)
    failed = sum(1 for r in rows if not r.converged)
    print(f"sweep: {len(rows)} rows, {failed} not converged")
    extra = sweep_summary(rows) if rc.format == "json" else None
    emit(render_rows(rows, rc.format, extra), rc.out)


def cmd_compare(rc: RunConfig) -> None:
    models = (1, 2, 3, 4)
    rows = run_sweep(_single_spec(rc, models), rc.solver, fluid=rc.fluid, networks=_networks(rc, models))
    for r in rows:
        print(summary_line(r))
    ranking = rank_models(rows, rc.rpm, rc.flow_lpm, rc.inlet_temp_c)
    ratios = {f"{m}_vs_1": improvement_ratio(rows, m, 1, rc.rpm, rc.flow_lpm, rc.inlet_temp_c) for m in (2, 3, 4)}
    print("ranking by heat rate: " + " > ".join(str(m) for m in ranking))
    print("heat-rate ratio vs model 1: " + ", ".join(f"{k} {_sig4(v)}" for k, v in ratios.items()))
    if rc.out is not None:
        emit(render_rows(rows, rc.format, {"ranking_heat_rate": ranking, "improvement_ratios": ratios}), rc.out)


def cmd_props(rc: RunConfig) -> None:
    T = rc.temp_c if rc.temp_c is not None else rc.inlet_temp_c
    fs = fluid_at(rc.fluid, T)
    rec = {
        "temperature_c": fs.temperature,
        "density_kg_m3": fs.density,
        "kinematic_viscosity_m2_s": fs.kinematic_viscosity,
        "specific_heat_j_kgk": fs.specific_heat,
        "thermal_conductivity_w_mk": fs.thermal_conductivity,
        "dynamic_viscosity_pa_s": fs.dynamic_viscosity,
        "prandtl": fs.prandtl,
        "clamped": fs.clamped,
    }
    report = consistency_check(rc.fluid)
    if rc.format == "json":
        rec["table_max_mu_discrepancy"] = report.max_discrepancy
        text = json.dumps(rec, indent=2) + "\n"
    else:
        text = ",".join(rec) + "\n" + ",".join(
            str(v).lower() if isinstance(v, bool) else format(v, ".6g") for v in rec.values()
        ) + "\n"
    print(f"table mu vs rho*nu: max discrepancy {report.max_discrepancy:.3g} ({'pass' if report.passed else 'FAIL'})")
    emit(text, rc.out)


def cmd_convergence(rc: RunConfig) -> None:
    model = rc.model or 2
    op = OperatingPoint(rc.rpm, rc.flow_lpm, rc.inlet_temp_c, rc.wall_temp_c)
    table = grid_convergence(lambda n: _networks_n(rc, model, n), op, rc.counts, rc.solver, rc.fluid)
    diffs = [None] + table.temperature_differences
    lines = ["n_segments,outlet_temp_c,max_pressure_pa,abs_diff_outlet_temp_c,converged"]
    for row, d in zip(table.rows, diffs):
        lines.append(
            f"{row.n_segments},{row.outlet_temperature:.12g},{row.max_gauge_pressure:.12g},"
            f"{'' if d is None else format(d, '.6g')},{'true' if row.converged else 'false'}"
        )
    text = "\n".join(lines) + "\n"
    if rc.format == "json":
        text = json.dumps(
            {"model": model, "rows": [r.__dict__ for r in table.rows], "differences": table.temperature_differences},
            indent=2,
        ) + "\n"
    print(f"grid study model {model}: differences {', '.join(format(d, '.3g') for d in table.temperature_differences) or 'none'}")
    emit(text, rc.out)


def _networks_n(rc: RunConfig, model: int, n: int):
    saved = rc.segments
    rc.segments = n
    try:
        return _networks(rc, (model,))[model]
    finally:
        rc.segments = saved


def cmd_design_scan(rc: RunConfig) -> None:
    model = rc.model or 2
    op = OperatingPoint(rc.rpm, rc.flow_lpm, rc.inlet_temp_c, rc.wall_temp_c)
    scan = design_scan(model, rc.teeth, rc.depths, rc.fills, op, rc.segments, rc.solver)
    for n, d, f, why in scan.infeasible:
        print(f"skipped teeth={n} depth={d:g} fill={f:g}: {why}")
    print(f"design scan: {len(scan.points)} feasible, {len(scan.front())} on the front")
    if rc.format == "json":
        text = json.dumps({"points": [p.__dict__ for p in scan.points], "infeasible": scan.infeasible}, indent=2) + "\n"
    else:
        text = scan_to_csv(scan.points)
    emit(text, rc.out)


def cmd_config_show(rc: RunConfig) -> None:
    emit(json.dumps({"solver": rc.solver.to_dict()}, indent=2) + "\n", rc.out)


def cmd_geometry_describe(rc: RunConfig) -> None:
    model = rc.model or 1
    emit(describe(_networks(rc, (model,))[model]), rc.out)


HANDLERS = {
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "compare": cmd_compare,
    "props": cmd_props,
    "convergence": cmd_convergence,
    "design-scan": cmd_design_scan,
    "config-show": cmd_config_show,
    "geometry-describe": cmd_geometry_describe,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        rc = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"rotorcool: usage error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"rotorcool: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(level=logging.WARNING - 10 * min(rc.verbosity, 2), format="%(levelname)s %(name)s: %(message)s")
    try:
        HANDLERS[rc.command](rc)
    except (GeometryError, SweepError) as exc:
        print(f"rotorcool: invalid input: {exc}", file=sys.stderr)
        return 2
    except (SolverError, ValueError, KeyError) as exc:
        print(f"rotorcool: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        name = getattr(exc, "filename", None) or rc.out
        print(f"rotorcool: cannot write {name}: {exc.strerror or exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
