"""Parameter sweeps, model comparisons and Pareto design exploration."""

from __future__ import annotations

import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import partial
from itertools import product
from pathlib import Path
from typing import Iterable, Optional, Sequence

from rotorcool.geometry import (
    MM2,
    PROFILE_DEPTH_RANGE_MM,
    ChannelNetwork,
    GeometryError,
    build_network,
    preset,
    shaft_network,
)
from rotorcool.properties import DEFAULT_FLUID, FluidPropertyTable
from rotorcool.solver import DEFAULT_CONFIG, OperatingPoint, SolverConfig, SolverError, march

log = logging.getLogger(__name__)

REFERENCE_SPEEDS = (0.0, 3000.0, 5000.0, 7000.0, 9000.0, 10000.0, 12000.0, 18000.0)
REFERENCE_FLOWS = (3.0, 4.0, 5.0, 6.0)
REFERENCE_INLET_TEMPS = (50.0, 60.0, 70.0, 80.0)
BASELINE = {"rpm": 10000.0, "flow_lpm": 5.0, "inlet_temp_c": 80.0}

SPEED_RANGE = (0.0, 18000.0)
FLOW_RANGE = (3.0, 6.0)
INLET_TEMP_RANGE = (50.0, 80.0)

CSV_HEADER = (
    "model,rpm,flow_lpm,inlet_temp_c,outlet_temp_c,heat_rate_w,"
    "max_pressure_pa,max_velocity_m_s,heat_per_area_w_m2,converged"
)

METRICS = {
    "total_heat_rate": "heat_rate_w",
    "heat_rate_w": "heat_rate_w",
    "outlet_temperature": "outlet_temp_c",
    "outlet_temp_c": "outlet_temp_c",
    "max_gauge_pressure": "max_pressure_pa",
    "max_pressure_pa": "max_pressure_pa",
    "max_velocity": "max_velocity_m_s",
    "max_velocity_m_s": "max_velocity_m_s",
    "heat_per_area": "heat_per_area_w_m2",
    "heat_per_area_w_m2": "heat_per_area_w_m2",
}


class SweepError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    """Cartesian grid of operating points; an empty axis falls back to its fixed value."""

    models: tuple[int, ...] = ()
    speeds: tuple[float, ...] = ()
    flows: tuple[float, ...] = ()
    inlet_temps: tuple[float, ...] = ()
    model: int = 2
    rpm: float = BASELINE["rpm"]
    flow_lpm: float = BASELINE["flow_lpm"]
    inlet_temp_c: float = BASELINE["inlet_temp_c"]
    wall_temp_c: float = 100.0
    ambient_temp_c: float = 65.0
    free_convection_coefficient: float = 10.0
    n_axial_segments: int = 200
    allow_out_of_range: bool = False

    def __post_init__(self) -> None:
        for name in ("models", "speeds", "flows", "inlet_temps"):
            object.__setattr__(self, name, tuple(getattr(self, name)))
        object.__setattr__(self, "models", tuple(int(m) for m in self.models))
        if not (self.models or self.speeds or self.flows or self.inlet_temps):
            raise SweepError("sweep has no axis to vary: all of models, speeds, flows, inlet_temps are empty")
        for m in self.axis_models:
            if m not in (1, 2, 3, 4):
                raise SweepError(f"unknown shaft model {m}")
        if self.allow_out_of_range:
            return
        for values, (lo, hi), what in (
            (self.axis_speeds, SPEED_RANGE, "rotational speed [1/min]"),
            (self.axis_flows, FLOW_RANGE, "inlet flow [l/min]"),
            (self.axis_inlet_temps, INLET_TEMP_RANGE, "inlet temperature [degC]"),
        ):
            bad = [v for v in values if not lo <= v <= hi]
            if bad:
                raise SweepError(f"{what} {bad} outside [{lo}, {hi}]; set allow_out_of_range to override")

    @property
    def axis_models(self) -> tuple[int, ...]:
        return self.models or (self.model,)

    @property
    def axis_speeds(self) -> tuple[float, ...]:
        return self.speeds or (self.rpm,)

    @property
    def axis_flows(self) -> tuple[float, ...]:
        return self.flows or (self.flow_lpm,)

    @property
    def axis_inlet_temps(self) -> tuple[float, ...]:
        return self.inlet_temps or (self.inlet_temp_c,)

    def points(self) -> list[tuple[int, float, float, float]]:
        """Grid points in canonical (model, speed, flow, inlet_temp) order."""
        return sorted(
            product(
                sorted(set(self.axis_models)),
                sorted(set(float(v) for v in self.axis_speeds)),
                sorted(set(float(v) for v in self.axis_flows)),
                sorted(set(float(v) for v in self.axis_inlet_temps)),
            )
        )

    def operating_point(self, rpm: float, flow: float, t_in: float) -> OperatingPoint:
        return OperatingPoint(
            rpm, flow, t_in, self.wall_temp_c, self.ambient_temp_c, self.free_convection_coefficient
        )

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        allowed = set(cls.__dataclass_fields__)
        unknown = set(data) - allowed
        if unknown:
            raise SweepError(f"unknown sweep keys: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}


def reference_grid(models: Sequence[int] = (1, 2, 3, 4), n_axial_segments: int = 200) -> SweepSpec:
    """Full speed x flow x inlet-temperature grid of the parametric study."""
    return SweepSpec(
        models=tuple(models), speeds=REFERENCE_SPEEDS, flows=REFERENCE_FLOWS,
        inlet_temps=REFERENCE_INLET_TEMPS, n_axial_segments=n_axial_segments,
    )


@dataclass(frozen=True)
class SweepRow:
    model: int
    rpm: float
    flow_lpm: float
    inlet_temp_c: float
    outlet_temp_c: float
    heat_rate_w: float
    max_pressure_pa: float
    max_velocity_m_s: float
    heat_per_area_w_m2: float
    converged: bool
    friction_pressure_pa: float = math.nan
    segment_heat_sum_w: float = math.nan
    error: str = ""

    @property
    def key(self) -> tuple[int, float, float, float]:
        return (self.model, self.rpm, self.flow_lpm, self.inlet_temp_c)


def _solve_row(point, networks, spec: SweepSpec, cfg: SolverConfig, fluid: FluidPropertyTable) -> SweepRow:
    model, rpm, flow, t_in = point
    network = networks[model]
    try:
        res = march(network, spec.operating_point(rpm, flow, t_in), cfg, fluid)
    except (SolverError, ValueError, ArithmeticError) as exc:
        nan = math.nan
        return SweepRow(model, rpm, flow, t_in, nan, nan, nan, nan, nan, False, error=str(exc))
    return SweepRow(
        model=model,
        rpm=rpm,
        flow_lpm=flow,
        inlet_temp_c=t_in,
        outlet_temp_c=res.outlet_temperature,
        heat_rate_w=res.total_heat_rate,
        max_pressure_pa=res.max_gauge_pressure,
        max_velocity_m_s=res.max_velocity,
        heat_per_area_w_m2=res.total_heat_rate / (network.spec.interface_area * MM2),
        converged=res.converged,
        friction_pressure_pa=res.friction_pressure_drop,
        segment_heat_sum_w=res.segment_heat_sum,
    )


def run_sweep(
    spec: SweepSpec,
    cfg: SolverConfig = DEFAULT_CONFIG,
    workers: int = 1,
    fluid: FluidPropertyTable = DEFAULT_FLUID,
    networks: Optional[dict[int, ChannelNetwork]] = None,
) -> list[SweepRow]:
    """Solve every grid point; rows come back in canonical order whatever ``workers`` is."""
    if networks is None:
        networks = {m: shaft_network(m, spec.n_axial_segments) for m in spec.axis_models}
    points = spec.points()
    solve = partial(_solve_row, networks=networks, spec=spec, cfg=cfg, fluid=fluid)
    if workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(solve, points, chunksize=max(1, len(points) // (4 * workers))))
    else:
        rows = [solve(p) for p in points]
    rows.sort(key=lambda r: r.key)
    for r in rows:
        if r.error:
            log.warning("sweep row %s failed: %s", r.key, r.error)
    return rows


def _g(x: float) -> str:
    return format(x, ".6g")


def rows_to_csv(rows: Iterable[SweepRow]) -> str:
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for r in rows:
        buf.write(
            ",".join(
                (
                    str(r.model), _g(r.rpm), _g(r.flow_lpm), _g(r.inlet_temp_c), _g(r.outlet_temp_c),
                    _g(r.heat_rate_w), _g(r.max_pressure_pa), _g(r.max_velocity_m_s),
                    _g(r.heat_per_area_w_m2), "true" if r.converged else "false",
                )
            )
            + "\n"
        )
    return buf.getvalue()


def row_to_record(r: SweepRow) -> dict:
    keys = CSV_HEADER.split(",")
    values = (
        r.model, r.rpm, r.flow_lpm, r.inlet_temp_c, r.outlet_temp_c, r.heat_rate_w,
        r.max_pressure_pa, r.max_velocity_m_s, r.heat_per_area_w_m2, r.converged,
    )
    rec = {k: (None if isinstance(v, float) and math.isnan(v) else v) for k, v in zip(keys, values)}
    if r.error:
        rec["error"] = r.error
    return rec


def _at(rows: Iterable[SweepRow], speed: float, flow: float, inlet_temp: float) -> dict[int, SweepRow]:
    return {
        r.model: r
        for r in rows
        if r.rpm == float(speed) and r.flow_lpm == float(flow) and r.inlet_temp_c == float(inlet_temp)
    }


def rank_models(
    rows: Iterable[SweepRow],
    speed: float,
    flow: float,
    inlet_temp: float,
    metric: str = "total_heat_rate",
    models: Optional[Sequence[int]] = None,
) -> list[int]:
    """Models at one operating point, best (largest metric) first; ties by model id."""
    try:
        attr = METRICS[metric]
    except KeyError:
        raise ValueError(f"unknown metric {metric!r}; choose from {sorted(METRICS)}") from None
    here = _at(rows, speed, flow, inlet_temp)
    wanted = list(models) if models is not None else sorted(here)
    missing = [m for m in wanted if m not in here]
    if missing:
        raise KeyError(f"no rows for models {missing} at ({speed}, {flow}, {inlet_temp})")
    return sorted(wanted, key=lambda m: (-getattr(here[m], attr), m))


def improvement_ratio(
    rows: Iterable[SweepRow], candidate: int, baseline: int, speed: float, flow: float, inlet_temp: float
) -> float:
    """Heat-rate ratio candidate / baseline at one operating point."""
    here = _at(rows, speed, flow, inlet_temp)
    for m in (candidate, baseline):
        if m not in here:
            raise KeyError(f"model {m} not solved at ({speed}, {flow}, {inlet_temp})")
    base = here[baseline].heat_rate_w
    if base == 0.0 or math.isnan(base):
        raise ValueError(f"improvement ratio undefined: baseline model {baseline} heat rate is {base}")
    return here[candidate].heat_rate_w / base


def sweep_summary(rows: Sequence[SweepRow], candidate: int = 3, baseline: int = 1) -> dict:
    """Per-point heat-rate rankings and, where both models exist, improvement ratios."""
    points = sorted({(r.rpm, r.flow_lpm, r.inlet_temp_c) for r in rows})
    out = []
    for speed, flow, t_in in points:
        entry = {
            "rpm": speed,
            "flow_lpm": flow,
            "inlet_temp_c": t_in,
            "ranking_heat_rate": rank_models(rows, speed, flow, t_in),
        }
        here = _at(rows, speed, flow, t_in)
        if candidate in here and baseline in here:
            try:
                entry[f"improvement_{candidate}_vs_{baseline}"] = improvement_ratio(
                    rows, candidate, baseline, speed, flow, t_in
                )
            except ValueError:
                entry[f"improvement_{candidate}_vs_{baseline}"] = None
        out.append(entry)
    return {
        "rows": len(rows),
        "failed": sum(1 for r in rows if not r.converged),
        "points": out,
    }


# -- Pareto -------------------------------------------------------------------


@dataclass(frozen=True)
class ParetoPoint:
    n_tooth_channels: int
    profile_depth: float
    tooth_fill_fraction: float
    heat_per_area: float
    max_gauge_pressure: float
    dominated: bool = False


def _dominated_flags(heat: Sequence[float], pressure: Sequence[float]) -> list[bool]:
    # sweep by ascending pressure; within equal pressure only the highest heat can survive
    order = sorted(range(len(heat)), key=lambda i: (pressure[i], -heat[i]))
    flags = [False] * len(heat)
    best = -math.inf
    i = 0
    while i < len(order):
        j = i
        p = pressure[order[i]]
        while j < len(order) and pressure[order[j]] == p:
            j += 1
        group = order[i:j]
        top = heat[group[0]]
        for k in group:
            if heat[k] < top or heat[k] <= best:
                flags[k] = True
        best = max(best, top)
        i = j
    return flags


def pareto_front(points: Sequence[ParetoPoint]) -> list[ParetoPoint]:
    """Points not dominated in (higher heat_per_area, lower max_gauge_pressure), input order kept."""
    flags = _dominated_flags([p.heat_per_area for p in points], [p.max_gauge_pressure for p in points])
    return [p for p, d in zip(points, flags) if not d]


def mark_dominated(points: Sequence[ParetoPoint]) -> list[ParetoPoint]:
    flags = _dominated_flags([p.heat_per_area for p in points], [p.max_gauge_pressure for p in points])
    return [replace(p, dominated=d) for p, d in zip(points, flags)]


@dataclass
class DesignScan:
    points: list[ParetoPoint] = field(default_factory=list)
    infeasible: list[tuple[int, float, float, str]] = field(default_factory=list)

    def front(self) -> list[ParetoPoint]:
        return [p for p in self.points if not p.dominated]


REFERENCE_POINT = OperatingPoint(10000.0, 5.0, 80.0)


def design_scan(
    base_model: int,
    tooth_counts: Sequence[int],
    depths: Sequence[float],
    fills: Sequence[float],
    op: OperatingPoint = REFERENCE_POINT,
    n_axial_segments: int = 100,
    cfg: SolverConfig = DEFAULT_CONFIG,
) -> DesignScan:
    """Solve every (tooth count, depth, fill) variant of a toothed shaft at ``op``.

    Heat per area is normalised by each variant's own heated wall area, since
    the data-sheet interface area only describes the unmodified shaft.
    """
    lo, hi = PROFILE_DEPTH_RANGE_MM
    bad = [d for d in depths if not lo <= d <= hi]
    if bad:
        raise ValueError(f"profile depths {bad} mm outside [{lo}, {hi}] mm")
    base = preset(base_model)
    if not base.has_teeth:
        raise ValueError(f"model {base_model} has no tooth channels to vary")
    scan = DesignScan()
    for n, depth, fill in product(tooth_counts, depths, fills):
        try:
            spec = replace(base, n_tooth_channels=int(n), profile_depth=float(depth), tooth_fill_fraction=float(fill))
            network = build_network(spec, n_axial_segments)
        except GeometryError as exc:
            scan.infeasible.append((int(n), float(depth), float(fill), str(exc)))
            continue
        res = march(network, op, cfg)
        scan.points.append(
            ParetoPoint(int(n), float(depth), float(fill), res.total_heat_rate / network.total_heated_area, res.max_gauge_pressure)
        )
    scan.points = mark_dominated(scan.points)
    return scan


def scan_to_csv(points: Iterable[ParetoPoint]) -> str:
    lines = ["n_tooth_channels,profile_depth_mm,tooth_fill_fraction,heat_per_area_w_m2,max_pressure_pa,dominated"]
    for p in points:
        lines.append(
            f"{p.n_tooth_channels},{_g(p.profile_depth)},{_g(p.tooth_fill_fraction)},"
            f"{_g(p.heat_per_area)},{_g(p.max_gauge_pressure)},{'true' if p.dominated else 'false'}"
        )
    return "\n".join(lines) + "\n"


def load_sweep_json(path: str | Path) -> SweepSpec:
    data = json.loads(Path(path).read_text())
    return SweepSpec.from_dict(data.get("sweep", data))
