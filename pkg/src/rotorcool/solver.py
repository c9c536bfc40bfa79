"""Steady 1-D thermal-hydraulic march through a rotating channel network.

Temperatures follow an exact exponential (epsilon-NTU) update per segment
against either the fixed-temperature wall or the free-convection ambient.
Pressures are marched backwards from the outlet (gauge zero) with Darcy
friction and the centrifugal head of each radial passage.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Callable, Sequence

from rotorcool.geometry import ChannelNetwork, FlowSegment, SegmentKind
from rotorcool.properties import (
    DEFAULT_FLUID,
    DEFAULT_SOLID,
    FluidPropertyTable,
    FluidState,
    SolidPropertyTable,
    fluid_at,
    solid_at,
)

RPM_TO_RAD_S = 2.0 * math.pi / 60.0
LPM_TO_M3_S = 1e-3 / 60.0


class SolverError(RuntimeError):
    """Raised when a march produces non-finite values."""


@dataclass(frozen=True)
class SolverConfig:
    laminar_nusselt: float = 3.66
    dittus_boelter_coeff: float = 0.023
    dittus_boelter_re_exp: float = 0.8
    dittus_boelter_pr_exp: float = 0.4
    laminar_friction_coeff: float = 64.0
    blasius_coeff: float = 0.316
    blasius_exp: float = 0.25
    re_laminar: float = 2300.0
    re_turbulent: float = 4000.0
    blend_mode: str = "linear"  # linear | smoothstep
    friction_rotation_coeff: float = 0.1
    friction_rotation_exp: float = 0.5
    friction_rotation: bool = True
    nusselt_rotation_coeff: float = 0.5
    nusselt_rotation_exp: float = 0.4
    # "laminar_floor": Re_rot / max(Re, re_laminar); "axial": Re_rot / (Re + 1)
    nusselt_rotation_reference: str = "laminar_floor"
    property_mode: str = "bulk"  # bulk | film
    # segment bulk temperature: "upwind" = segment inlet (first order),
    # "midpoint" = mean of inlet and outlet (second order, needs the fixed point)
    bulk_evaluation: str = "upwind"
    constant_properties: bool = False
    rotation: bool = True
    wall_conduction: bool = True
    tolerance: float = 1e-6
    max_iterations: int = 100

    def __post_init__(self) -> None:
        if self.blend_mode not in ("linear", "smoothstep"):
            raise ValueError(f"blend_mode must be linear or smoothstep, got {self.blend_mode!r}")
        if self.property_mode not in ("bulk", "film"):
            raise ValueError(f"property_mode must be bulk or film, got {self.property_mode!r}")
        if self.bulk_evaluation not in ("upwind", "midpoint"):
            raise ValueError(f"bulk_evaluation must be upwind or midpoint, got {self.bulk_evaluation!r}")
        if self.nusselt_rotation_reference not in ("laminar_floor", "axial"):
            raise ValueError(
                "nusselt_rotation_reference must be laminar_floor or axial, "
                f"got {self.nusselt_rotation_reference!r}"
            )
        if not 0.0 < self.re_laminar < self.re_turbulent:
            raise ValueError("transition bounds must satisfy 0 < re_laminar < re_turbulent")
        if self.tolerance <= 0.0 or self.max_iterations < 1:
            raise ValueError("tolerance must be positive and max_iterations >= 1")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "SolverConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ValueError(f"unknown solver configuration keys: {sorted(unknown)}")
        base = cls()
        typed = {}
        for name, value in data.items():
            kind = type(getattr(base, name))
            if kind is bool:
                if not isinstance(value, bool):
                    raise ValueError(f"solver option {name} must be true or false, got {value!r}")
            elif kind in (int, float):
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValueError(f"solver option {name} must be numeric, got {value!r}")
                if kind is int and value != int(value):
                    raise ValueError(f"solver option {name} must be an integer, got {value!r}")
                value = kind(value)
            elif not isinstance(value, kind):
                raise ValueError(f"solver option {name} must be {kind.__name__}, got {value!r}")
            typed[name] = value
        return replace(base, **typed)


DEFAULT_CONFIG = SolverConfig()


@dataclass(frozen=True)
class OperatingPoint:
    rotational_speed: float  # 1/min
    inlet_flow: float  # l/min
    inlet_temperature: float  # degC
    wall_temperature: float = 100.0
    ambient_temperature: float = 65.0
    free_convection_coefficient: float = 10.0

    def __post_init__(self) -> None:
        if not self.inlet_flow > 0.0:
            raise ValueError(f"inlet_flow must be positive, got {self.inlet_flow}")
        if self.rotational_speed < 0.0:
            raise ValueError(f"rotational_speed must be >= 0, got {self.rotational_speed}")
        if not self.inlet_temperature < self.wall_temperature:
            raise ValueError("inlet_temperature must be below wall_temperature")
        if self.free_convection_coefficient < 0.0:
            raise ValueError("free_convection_coefficient must be >= 0")

    @property
    def omega(self) -> float:
        return self.rotational_speed * RPM_TO_RAD_S

    @property
    def flow_m3_s(self) -> float:
        return self.inlet_flow * LPM_TO_M3_S


@dataclass(frozen=True)
class SegmentState:
    kind: SegmentKind
    inlet_temperature: float
    outlet_temperature: float
    bulk_temperature: float
    gauge_pressure: float  # at the segment's upstream face
    axial_velocity: float
    tangential_velocity: float
    reynolds: float
    rotational_reynolds: float
    nusselt: float
    heat_transfer_coefficient: float
    heat_input: float
    friction_dp: float
    centrifugal_dp: float  # pressure change along the flow direction
    density: float
    dynamic_viscosity: float
    clamped: bool = False

    @property
    def velocity(self) -> float:
        return math.hypot(self.axial_velocity, self.tangential_velocity)


@dataclass(frozen=True)
class SolveResult:
    inlet_temperature: float
    outlet_temperature: float
    total_heat_rate: float
    max_gauge_pressure: float
    max_velocity: float
    per_segment: tuple[SegmentState, ...]
    iterations: int
    converged: bool
    mass_flow: float
    friction_pressure_drop: float

    @property
    def inlet_gauge_pressure(self) -> float:
        return self.per_segment[0].gauge_pressure

    @property
    def segment_heat_sum(self) -> float:
        return math.fsum(s.heat_input for s in self.per_segment)

    @property
    def friction_power(self) -> float:
        """Pumping work against friction, m_dot * dp / rho, in W."""
        return self.mass_flow * self.friction_pressure_drop / self.per_segment[0].density


# -- closed-form pieces -------------------------------------------------------


def tangential_velocity(omega: float, r: float) -> float:
    return r * omega


def centrifugal_delta_p(density: float, omega: float, r1: float, r2: float) -> float:
    """Centrifugal pressure rise from r1 out to r2, rho * omega^2 * (r2^2 - r1^2) / 2."""
    if not r2 >= r1 >= 0.0:
        raise ValueError(f"need r2 >= r1 >= 0, got r1={r1}, r2={r2}")
    return density * omega * omega * (r2 * r2 - r1 * r1) / 2.0


def rotational_reynolds(density: float, omega: float, hydraulic_diameter: float, mu: float) -> float:
    return density * omega * hydraulic_diameter * hydraulic_diameter / mu


def heat_transfer_rate(density: float, Q: float, cp: float, T_out: float, T_in: float) -> float:
    """Coolant heat pickup rho * Q * cp * (T_out - T_in) in W."""
    if not Q > 0.0:
        raise ValueError(f"volumetric flow must be positive, got {Q}")
    return density * Q * cp * (T_out - T_in)


def _blend_weight(Re: float, cfg: SolverConfig) -> float:
    if Re <= cfg.re_laminar:
        return 0.0
    if Re >= cfg.re_turbulent:
        return 1.0
    w = (Re - cfg.re_laminar) / (cfg.re_turbulent - cfg.re_laminar)
    if cfg.blend_mode == "smoothstep":
        w = w * w * (3.0 - 2.0 * w)
    return w


def friction_factor(Re: float, Re_rot: float = 0.0, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Darcy friction factor with a rotation multiplier.

    Laminar 64/Re below ``re_laminar``, Blasius above ``re_turbulent`` and a
    blend in between, times ``(1 + C_f Re_rot / Re) ** 0.5``.
    """
    if not Re > 0.0:
        raise ValueError(f"Reynolds number must be positive, got {Re}")
    w = _blend_weight(Re, cfg)
    if w == 0.0:
        f = cfg.laminar_friction_coeff / Re
    elif w == 1.0:
        f = cfg.blasius_coeff * Re ** (-cfg.blasius_exp)
    else:
        f = (1.0 - w) * cfg.laminar_friction_coeff / Re + w * cfg.blasius_coeff * Re ** (-cfg.blasius_exp)
    if cfg.friction_rotation and Re_rot > 0.0:
        f *= (1.0 + cfg.friction_rotation_coeff * Re_rot / Re) ** cfg.friction_rotation_exp
    return f


def nusselt(Re: float, Pr: float, Re_rot: float = 0.0, cfg: SolverConfig = DEFAULT_CONFIG) -> float:
    """Duct Nusselt number: constant-wall laminar plateau, Dittus-Boelter, rotation gain."""
    if not Re > 0.0 or not Pr > 0.0:
        raise ValueError(f"Re and Pr must be positive, got Re={Re}, Pr={Pr}")
    if Re_rot < 0.0:
        raise ValueError(f"rotational Reynolds number must be >= 0, got {Re_rot}")
    w = _blend_weight(Re, cfg)
    nu_lam = cfg.laminar_nusselt
    if w == 0.0:
        nu = nu_lam
    else:
        nu_turb = cfg.dittus_boelter_coeff * Re ** cfg.dittus_boelter_re_exp * Pr ** cfg.dittus_boelter_pr_exp
        nu = nu_turb if w == 1.0 else (1.0 - w) * nu_lam + w * nu_turb
    if Re_rot > 0.0:
        if cfg.nusselt_rotation_reference == "axial":
            ratio = Re_rot / (Re + 1.0)
        else:
            ratio = Re_rot / max(Re, cfg.re_laminar)
        nu *= (1.0 + cfg.nusselt_rotation_coeff * ratio) ** cfg.nusselt_rotation_exp
    return nu


# -- march --------------------------------------------------------------------


@dataclass
class _Context:
    cfg: SolverConfig
    table: FluidPropertyTable
    op: OperatingPoint
    omega: float
    Q: float
    mdot: float
    cp_ref: float
    k_wall: float
    frozen: FluidState | None


def _props(ctx: _Context, seg: FlowSegment, t_bulk: float) -> FluidState:
    if ctx.frozen is not None:
        return ctx.frozen
    if ctx.cfg.property_mode == "film" and seg.heated:
        return fluid_at(ctx.table, 0.5 * (t_bulk + ctx.op.wall_temperature))
    return fluid_at(ctx.table, t_bulk)


def _thermal(ctx: _Context, seg: FlowSegment, t_in: float, t_bulk: float):
    fs = _props(ctx, seg, t_bulk)
    v = ctx.Q / seg.flow_area
    dh = seg.hydraulic_diameter
    Re = fs.density * v * dh / fs.dynamic_viscosity
    Re_rot = rotational_reynolds(fs.density, ctx.omega, dh, fs.dynamic_viscosity)
    Nu = nusselt(Re, fs.prandtl, Re_rot, ctx.cfg)
    h = Nu * fs.thermal_conductivity / dh
    op = ctx.op
    if seg.heated:
        t_ref = op.wall_temperature
        resistance = 1.0 / h
        if ctx.cfg.wall_conduction and seg.wall_conduction_length > 0.0:
            resistance += seg.wall_conduction_length / ctx.k_wall
        U = 1.0 / resistance
    else:
        t_ref = op.ambient_temperature
        hf = op.free_convection_coefficient
        U = 0.0 if hf == 0.0 else 1.0 / (1.0 / h + 1.0 / hf)
    ntu = U * seg.heat_exchange_area / (ctx.mdot * ctx.cp_ref)
    t_out = t_ref - (t_ref - t_in) * math.exp(-ntu)
    return t_out, fs, v, Re, Re_rot, Nu, h


def march(
    network: ChannelNetwork,
    op: OperatingPoint,
    cfg: SolverConfig = DEFAULT_CONFIG,
    fluid: FluidPropertyTable = DEFAULT_FLUID,
    solid: SolidPropertyTable = DEFAULT_SOLID,
) -> SolveResult:
    """Solve temperature, pressure and velocity along ``network`` at ``op``.

    The energy balance carries heat with the inlet heat capacity so that the
    segment heat inputs telescope exactly onto rho*Q*cp*(T_out - T_in).
    Properties entering the heat transfer coefficient and friction use each
    segment's mean bulk temperature, found by fixed-point iteration.
    """
    inlet = fluid_at(fluid, op.inlet_temperature)
    Q = op.flow_m3_s
    ctx = _Context(
        cfg=cfg,
        table=fluid,
        op=op,
        omega=op.omega if cfg.rotation else 0.0,
        Q=Q,
        mdot=inlet.density * Q,
        cp_ref=inlet.specific_heat,
        k_wall=solid_at(solid, op.wall_temperature)[0],
        frozen=inlet if cfg.constant_properties else None,
    )
    segs = network.segments
    midpoint = cfg.bulk_evaluation == "midpoint"
    t_out_prev: list[float] | None = None
    converged = False
    iterations = 0
    for iterations in range(1, cfg.max_iterations + 1):
        t = op.inlet_temperature
        t_out_new = []
        for i, seg in enumerate(segs):
            t_bulk = 0.5 * (t + t_out_prev[i]) if midpoint and t_out_prev is not None else t
            t = _thermal(ctx, seg, t, t_bulk)[0]
            if not math.isfinite(t):
                raise SolverError(
                    f"non-finite temperature in segment {i} ({seg.kind.value}) at iteration {iterations}"
                )
            t_out_new.append(t)
        if t_out_prev is not None:
            change = max(abs(a - b) for a, b in zip(t_out_new, t_out_prev))
            t_out_prev = t_out_new
            if change < cfg.tolerance:
                converged = True
                break
        else:
            t_out_prev = t_out_new
    return _finish(ctx, network, t_out_prev, iterations, converged)


def _finish(ctx: _Context, network: ChannelNetwork, t_out: list[float], iterations: int, converged: bool) -> SolveResult:
    op = ctx.op
    rows = []
    t = op.inlet_temperature
    midpoint = ctx.cfg.bulk_evaluation == "midpoint"
    for seg, t_end in zip(network.segments, t_out):
        t_bulk = 0.5 * (t + t_end) if midpoint else t
        _, fs, v, Re, Re_rot, Nu, h = _thermal(ctx, seg, t, t_bulk)
        friction = friction_factor(Re, Re_rot, ctx.cfg) * seg.length / seg.hydraulic_diameter * fs.density * v * v / 2.0
        if seg.is_radial:
            r1, r2 = sorted((seg.radius_start, seg.radius_end))
            rise = centrifugal_delta_p(fs.density, ctx.omega, r1, r2)
            cent = rise if seg.kind is SegmentKind.RADIAL_INLET else -rise
        else:
            cent = 0.0
        rows.append([seg, t, t_end, t_bulk, v, Re, Re_rot, Nu, h, friction, cent, fs])
        t = t_end

    # backwards from the outlet; pressure at each segment's upstream face
    p = 0.0
    pressures = [0.0] * len(rows)
    for i in range(len(rows) - 1, -1, -1):
        friction, cent = rows[i][9], rows[i][10]
        p = p + friction - cent
        pressures[i] = p

    states = []
    for (seg, t_a, t_b, t_bulk, v, Re, Re_rot, Nu, h, friction, cent, fs), p_up in zip(rows, pressures):
        states.append(
            SegmentState(
                kind=seg.kind,
                inlet_temperature=t_a,
                outlet_temperature=t_b,
                bulk_temperature=t_bulk,
                gauge_pressure=p_up,
                axial_velocity=v,
                tangential_velocity=tangential_velocity(ctx.omega, seg.mean_radius),
                reynolds=Re,
                rotational_reynolds=Re_rot,
                nusselt=Nu,
                heat_transfer_coefficient=h,
                heat_input=ctx.mdot * ctx.cp_ref * (t_b - t_a),
                friction_dp=friction,
                centrifugal_dp=cent,
                density=fs.density,
                dynamic_viscosity=fs.dynamic_viscosity,
                clamped=fs.clamped,
            )
        )
    t_outlet = t_out[-1]
    inlet_density = ctx.mdot / ctx.Q
    result = SolveResult(
        inlet_temperature=op.inlet_temperature,
        outlet_temperature=t_outlet,
        total_heat_rate=heat_transfer_rate(inlet_density, ctx.Q, ctx.cp_ref, t_outlet, op.inlet_temperature),
        max_gauge_pressure=max(0.0, max(pressures)),
        max_velocity=max(s.velocity for s in states),
        per_segment=tuple(states),
        iterations=iterations,
        converged=converged,
        mass_flow=ctx.mdot,
        friction_pressure_drop=math.fsum(r[9] for r in rows),
    )
    for name in ("outlet_temperature", "total_heat_rate", "max_gauge_pressure", "max_velocity"):
        if not math.isfinite(getattr(result, name)):
            raise SolverError(f"non-finite {name} in solve result")
    return result


# -- grid study ---------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    n_segments: int
    outlet_temperature: float
    max_gauge_pressure: float
    converged: bool


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple[ConvergenceRow, ...]

    @property
    def temperature_differences(self) -> list[float]:
        return [abs(b.outlet_temperature - a.outlet_temperature) for a, b in zip(self.rows, self.rows[1:])]

    @property
    def pressure_differences(self) -> list[float]:
        return [abs(b.max_gauge_pressure - a.max_gauge_pressure) for a, b in zip(self.rows, self.rows[1:])]

    @property
    def contracting(self) -> bool:
        d = self.temperature_differences
        return all(b < a for a, b in zip(d, d[1:]))


def grid_convergence(
    builder: Callable[[int], ChannelNetwork],
    op: OperatingPoint,
    counts: Sequence[int],
    cfg: SolverConfig = DEFAULT_CONFIG,
    fluid: FluidPropertyTable = DEFAULT_FLUID,
) -> ConvergenceTable:
    """Re-solve ``op`` on networks of increasing axial resolution."""
    counts = list(counts)
    if not counts:
        raise ValueError("counts must not be empty")
    if any(b <= a for a, b in zip(counts, counts[1:])):
        raise ValueError("counts must be strictly ascending")
    rows = []
    for n in counts:
        res = march(builder(n), op, cfg, fluid)
        rows.append(ConvergenceRow(n, res.outlet_temperature, res.max_gauge_pressure, res.converged))
    return ConvergenceTable(tuple(rows))
