"""Shaft presets and their compilation into a serial 1-D channel network.

Dimensions on :class:`ShaftSpec` are in millimetres (areas in mm^2) to match
the shaft data sheet; :class:`FlowSegment` and everything downstream is SI.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from pathlib import Path
from typing import Optional

MM = 1e-3
MM2 = 1e-6

PROFILE_DEPTH_RANGE_MM = (1.0, 6.0)
FILL_SEARCH_RANGE = (0.2, 0.8)
MIN_AXIAL_SEGMENTS = 10


class GeometryError(ValueError):
    """Raised for specs or networks that cannot be built."""


class SegmentKind(str, Enum):
    AXIAL_CORE = "axial_core"
    RADIAL_INLET = "radial_inlet"
    RADIAL_OUTLET = "radial_outlet"
    TOOTH_CHANNEL = "tooth_channel"


class InnerProfile(str, Enum):
    NONE = "none"
    SMOOTH = "smooth"
    WAVY = "wavy"


@dataclass(frozen=True)
class ShaftSpec:
    model_id: int
    l_total: float
    l_tempfix: float
    d_in: float
    d_in_post: float
    d_out: float
    d_out_pre: Optional[float]
    d_outer: float
    d_inner: Optional[float]
    fix_temp_area: float
    interface_area: float
    n_inlet_passages: int = 0
    d_pin: Optional[float] = None
    n_outlet_passages: int = 0
    d_pout: Optional[float] = None
    n_tooth_channels: int = 0
    profile_depth: Optional[float] = None
    tooth_fill_fraction: float = 0.5
    inner_profile: InnerProfile = InnerProfile.NONE
    # wavy inner can: flow-area gain and wetted-perimeter reduction per channel
    openness_factor: float = 1.15
    perimeter_factor: float = 0.95
    # which data-sheet bore feeds the radial inlets / receives the radial outlets
    feed_bore: str = "d_in_post"
    exit_bore: str = "d_out"
    # "full": interface area belongs to the heated stretch; "scaled": times l_tempfix/l_total
    interface_basis: str = "full"
    min_wall: float = 0.0
    fill_clamped: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "inner_profile", InnerProfile(self.inner_profile))
        if self.model_id not in (1, 2, 3, 4):
            raise GeometryError(f"unknown shaft model {self.model_id!r}")
        lengths = {
            "l_total": self.l_total,
            "l_tempfix": self.l_tempfix,
            "d_in": self.d_in,
            "d_in_post": self.d_in_post,
            "d_out": self.d_out,
            "d_outer": self.d_outer,
            "fix_temp_area": self.fix_temp_area,
            "interface_area": self.interface_area,
        }
        for name in ("d_out_pre", "d_inner", "d_pin", "d_pout", "profile_depth"):
            if getattr(self, name) is not None:
                lengths[name] = getattr(self, name)
        for name, value in lengths.items():
            if not value > 0.0:
                raise GeometryError(f"{name} must be positive, got {value}")
        if self.l_tempfix > self.l_total:
            raise GeometryError("l_tempfix exceeds l_total")
        if self.d_inner is not None and self.d_inner >= self.d_outer:
            raise GeometryError("d_inner must be smaller than d_outer")
        if self.feed_bore not in ("d_in", "d_in_post"):
            raise GeometryError(f"feed_bore must be d_in or d_in_post, got {self.feed_bore!r}")
        if self.exit_bore not in ("d_out", "d_out_pre"):
            raise GeometryError(f"exit_bore must be d_out or d_out_pre, got {self.exit_bore!r}")
        if self.interface_basis not in ("full", "scaled"):
            raise GeometryError(f"interface_basis must be full or scaled, got {self.interface_basis!r}")
        if self.has_teeth:
            if self.d_inner is None or self.profile_depth is None:
                raise GeometryError("toothed shafts need d_inner and profile_depth")
            lo, hi = PROFILE_DEPTH_RANGE_MM
            if not lo <= self.profile_depth <= hi:
                raise GeometryError(
                    f"profile_depth {self.profile_depth} mm outside [{lo}, {hi}] mm"
                )
            if not 0.0 < self.tooth_fill_fraction < 1.0:
                raise GeometryError("tooth_fill_fraction must lie in (0, 1)")
            for n, d, what in (
                (self.n_inlet_passages, self.d_pin, "inlet"),
                (self.n_outlet_passages, self.d_pout, "outlet"),
            ):
                if n < 1 or d is None:
                    raise GeometryError(f"toothed shafts need at least one {what} passage")
        if self.openness_factor <= 0.0 or self.perimeter_factor <= 0.0:
            raise GeometryError("wavy-profile factors must be positive")

    @property
    def has_teeth(self) -> bool:
        return self.n_tooth_channels > 0

    @property
    def channel_mean_diameter(self) -> float:
        """Diameter (mm) at which the tooth channels sit."""
        return self.d_inner + self.profile_depth

    @property
    def channel_width(self) -> float:
        """Circumferential groove width (mm) at the channel mean diameter."""
        return (1.0 - self.tooth_fill_fraction) * math.pi * self.channel_mean_diameter / self.n_tooth_channels

    @property
    def target_heated_area(self) -> float:
        """Interface area (mm^2) the heated channel walls should reproduce."""
        if self.interface_basis == "scaled":
            return self.interface_area * self.l_tempfix / self.l_total
        return self.interface_area

    def to_dict(self) -> dict:
        d = asdict(self)
        d["inner_profile"] = self.inner_profile.value
        return d


@dataclass(frozen=True)
class FlowSegment:
    kind: SegmentKind
    length: float
    flow_area: float
    wetted_perimeter: float
    hydraulic_diameter: float
    mean_radius: float
    radius_start: float
    radius_end: float
    heated: bool
    heat_exchange_area: float
    n_parallel: int = 1
    # conduction path through the casing, R'' = wall_conduction_length / k_steel
    wall_conduction_length: float = 0.0

    @property
    def is_radial(self) -> bool:
        return self.kind in (SegmentKind.RADIAL_INLET, SegmentKind.RADIAL_OUTLET)


@dataclass(frozen=True)
class ChannelNetwork:
    segments: tuple[FlowSegment, ...]
    spec: ShaftSpec

    @property
    def total_heated_area(self) -> float:
        return sum(s.heat_exchange_area for s in self.segments if s.heated)

    @property
    def max_radius(self) -> float:
        return max(s.mean_radius for s in self.segments)

    @property
    def n_axial_segments(self) -> int:
        kind = SegmentKind.TOOTH_CHANNEL if self.spec.has_teeth else SegmentKind.AXIAL_CORE
        return sum(1 for s in self.segments if s.kind is kind and s.heated)


_TABLE = {
    # model: l_total, l_tempfix, d_in, d_in_post, d_out, d_out_pre, d_outer, d_inner,
    #        fix_temp_area, interface_area, n_in, d_pin, n_out, d_pout, n_teeth
    1: (340.35, 187.3, 11.3, 9.0, 18.0, None, 52.1, None, 30660.0, 41961.0, 0, None, 0, None, 0),
    2: (340.35, 169.2, 11.3, 9.0, 18.0, 18.0, 56.6, 47.8, 35476.0, 47547.0, 7, 4.5, 7, 4.5, 21),
    3: (340.35, 166.6, 11.0, 9.0, 20.0, 18.0, 56.6, 45.6, 34968.0, 46489.0, 7, 4.5, 7, 4.5, 21),
    4: (359.05, 171.2, 11.0, 9.0, 20.0, 18.0, 98.0, 88.2, 63882.0, 90393.0, 12, 6.0, 12, 6.0, 36),
}


def default_profile_depth(d_outer: float, d_inner: float) -> float:
    lo, hi = PROFILE_DEPTH_RANGE_MM
    return min(max((d_outer - d_inner) / 2.0, lo), hi)


def preset(model_id: int) -> ShaftSpec:
    """Data-sheet geometry for shaft model 1-4 (fill fraction not yet calibrated)."""
    if model_id not in _TABLE:
        raise GeometryError(f"unknown shaft model {model_id!r}; expected 1, 2, 3 or 4")
    (l_total, l_tf, d_in, d_in_post, d_out, d_out_pre, d_outer, d_inner,
     a_fix, a_int, n_in, d_pin, n_out, d_pout, n_teeth) = _TABLE[model_id]
    if model_id == 1:
        depth, profile = None, InnerProfile.NONE
    else:
        depth = default_profile_depth(d_outer, d_inner)
        profile = InnerProfile.WAVY if model_id == 3 else InnerProfile.SMOOTH
    return ShaftSpec(
        model_id=model_id, l_total=l_total, l_tempfix=l_tf, d_in=d_in, d_in_post=d_in_post,
        d_out=d_out, d_out_pre=d_out_pre, d_outer=d_outer, d_inner=d_inner,
        fix_temp_area=a_fix, interface_area=a_int, n_inlet_passages=n_in, d_pin=d_pin,
        n_outlet_passages=n_out, d_pout=d_pout, n_tooth_channels=n_teeth,
        profile_depth=depth, inner_profile=profile,
    )


def hydraulic_diameter(area: float, perimeter: float) -> float:
    """4 * area / perimeter; same units in, same units out."""
    if area <= 0.0 or perimeter <= 0.0:
        raise GeometryError(f"area and perimeter must be positive (got {area}, {perimeter})")
    return 4.0 * area / perimeter


def heated_channel_area(spec: ShaftSpec, fill: Optional[float] = None) -> float:
    """Groove floor plus both tooth flanks over the heated length, in mm^2."""
    fill = spec.tooth_fill_fraction if fill is None else fill
    width = (1.0 - fill) * math.pi * spec.channel_mean_diameter / spec.n_tooth_channels
    return spec.n_tooth_channels * (width + 2.0 * spec.profile_depth) * spec.l_tempfix


def calibrate_fill_fraction(spec: ShaftSpec, rtol: float = 1e-3) -> ShaftSpec:
    """Bisect the tooth fill fraction so the heated wall area hits the interface area.

    The search is confined to ``FILL_SEARCH_RANGE``. When the target cannot be
    reached the nearest bound is returned with ``fill_clamped=True``.
    """
    if not spec.has_teeth:
        raise GeometryError("fill-fraction calibration applies to toothed shafts only")
    target = spec.target_heated_area

    def residual(fill: float) -> float:
        return heated_channel_area(spec, fill) - target

    if abs(residual(spec.tooth_fill_fraction)) <= rtol * target:
        return spec

    lo, hi = FILL_SEARCH_RANGE
    r_lo, r_hi = residual(lo), residual(hi)
    # area falls as fill rises
    if r_hi >= 0.0:
        return replace(spec, tooth_fill_fraction=hi, fill_clamped=r_hi > rtol * target)
    if r_lo <= 0.0:
        return replace(spec, tooth_fill_fraction=lo, fill_clamped=-r_lo > rtol * target)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r_mid = residual(mid)
        if abs(r_mid) <= rtol * target:
            break
        if r_mid > 0.0:
            lo = mid
        else:
            hi = mid
    return replace(spec, tooth_fill_fraction=mid, fill_clamped=False)


def _core(diameter_mm: float, length_m: float, heated: bool, wall_len: float = 0.0) -> FlowSegment:
    d = diameter_mm * MM
    area = math.pi * d * d / 4.0
    perim = math.pi * d
    return FlowSegment(
        kind=SegmentKind.AXIAL_CORE, length=length_m, flow_area=area, wetted_perimeter=perim,
        hydraulic_diameter=hydraulic_diameter(area, perim), mean_radius=0.0,
        radius_start=0.0, radius_end=0.0, heated=heated,
        heat_exchange_area=perim * length_m, wall_conduction_length=wall_len,
    )


def _radial(kind: SegmentKind, n: int, d_mm: float, r_start: float, r_end: float) -> FlowSegment:
    d = d_mm * MM
    length = abs(r_end - r_start)
    area = n * math.pi * d * d / 4.0
    perim = n * math.pi * d
    return FlowSegment(
        kind=kind, length=length, flow_area=area, wetted_perimeter=perim,
        hydraulic_diameter=hydraulic_diameter(area / n, perim / n),
        mean_radius=0.5 * (r_start + r_end), radius_start=r_start, radius_end=r_end,
        heated=False, heat_exchange_area=perim * length, n_parallel=n,
    )


def check_feasible(spec: ShaftSpec) -> None:
    """Raise :class:`GeometryError` when a toothed spec cannot be realised."""
    if not spec.has_teeth:
        return
    envelope = spec.d_outer - spec.min_wall
    if spec.d_inner + 2.0 * spec.profile_depth > envelope + 1e-9:
        raise GeometryError(
            f"model {spec.model_id}: d_inner {spec.d_inner} + 2 x depth {spec.profile_depth} "
            f"exceeds d_outer {spec.d_outer} minus wall {spec.min_wall} mm"
        )
    if spec.channel_width <= 0.0:
        raise GeometryError(f"model {spec.model_id}: channel width {spec.channel_width:.4g} mm <= 0")
    feed = getattr(spec, spec.feed_bore)
    exit_ = getattr(spec, spec.exit_bore)
    if feed >= spec.d_inner or exit_ >= spec.d_inner:
        raise GeometryError(
            f"model {spec.model_id}: radial passages need the bores ({feed}, {exit_} mm) "
            f"inside the inner can ({spec.d_inner} mm)"
        )


def build_network(spec: ShaftSpec, n_axial_segments: int) -> ChannelNetwork:
    """Compile a shaft spec into its inlet-to-outlet segment sequence."""
    if n_axial_segments < MIN_AXIAL_SEGMENTS:
        raise GeometryError(f"n_axial_segments must be >= {MIN_AXIAL_SEGMENTS}, got {n_axial_segments}")
    check_feasible(spec)
    end_len = 0.5 * (spec.l_total - spec.l_tempfix) * MM
    heated_len = spec.l_tempfix * MM / n_axial_segments
    segs: list[FlowSegment] = []

    if not spec.has_teeth:
        r_i, r_o = spec.d_out * MM / 2.0, spec.d_outer * MM / 2.0
        wall_len = r_i * math.log(r_o / r_i)
        if end_len > 0.0:
            segs.append(_core(spec.d_out, end_len, heated=False))
        segs.extend(_core(spec.d_out, heated_len, True, wall_len) for _ in range(n_axial_segments))
        if end_len > 0.0:
            segs.append(_core(spec.d_out, end_len, heated=False))
        return ChannelNetwork(tuple(segs), spec)

    feed_d = getattr(spec, spec.feed_bore)
    exit_d = getattr(spec, spec.exit_bore)
    r_can = spec.d_inner * MM / 2.0
    r_mean = spec.channel_mean_diameter * MM / 2.0

    n = spec.n_tooth_channels
    w = spec.channel_width * MM
    depth = spec.profile_depth * MM
    area_one = w * depth
    perim_one = 2.0 * (w + depth)
    if spec.inner_profile is InnerProfile.WAVY:
        area_one *= spec.openness_factor
        perim_one *= spec.perimeter_factor
    dh = hydraulic_diameter(area_one, perim_one)
    wall_len = max(spec.d_outer * MM / 2.0 - r_mean, 0.0)

    segs.append(_core(feed_d, end_len, heated=False))
    segs.append(_radial(SegmentKind.RADIAL_INLET, spec.n_inlet_passages, spec.d_pin, feed_d * MM / 2.0, r_can))
    channel = FlowSegment(
        kind=SegmentKind.TOOTH_CHANNEL, length=heated_len, flow_area=n * area_one,
        wetted_perimeter=n * perim_one, hydraulic_diameter=dh, mean_radius=r_mean,
        radius_start=r_mean, radius_end=r_mean, heated=True,
        heat_exchange_area=n * (w + 2.0 * depth) * heated_len, n_parallel=n,
        wall_conduction_length=wall_len,
    )
    segs.extend([channel] * n_axial_segments)
    segs.append(_radial(SegmentKind.RADIAL_OUTLET, spec.n_outlet_passages, spec.d_pout, r_can, exit_d * MM / 2.0))
    segs.append(_core(exit_d, end_len, heated=False))
    return ChannelNetwork(tuple(segs), spec)


def shaft_network(model_id: int, n_axial_segments: int = 200, calibrate: bool = True, **overrides) -> ChannelNetwork:
    """Preset -> optional overrides -> fill calibration -> network."""
    spec = preset(model_id)
    if overrides:
        spec = replace(spec, **overrides)
    if calibrate and spec.has_teeth:
        spec = calibrate_fill_fraction(spec)
    return build_network(spec, n_axial_segments)


def spec_from_dict(data: dict, base: Optional[ShaftSpec] = None) -> ShaftSpec:
    """Overlay a dict of ShaftSpec fields on ``base`` (or on the preset named by ``model_id``)."""
    known = {f.name for f in fields(ShaftSpec)}
    unknown = set(data) - known
    if unknown:
        raise GeometryError(f"unknown geometry keys: {sorted(unknown)}")
    if base is None:
        if "model_id" not in data:
            raise GeometryError("geometry override needs model_id or a base spec")
        base = preset(int(data["model_id"]))
    return replace(base, **data)


def load_spec_json(path: str | Path, base: Optional[ShaftSpec] = None) -> ShaftSpec:
    return spec_from_dict(json.loads(Path(path).read_text()), base)


def describe(network: ChannelNetwork) -> str:
    """Fixed-order ``key: value`` summary of a spec and its compiled network."""
    spec = network.spec
    lines = [f"{f.name}: {_fmt(getattr(spec, f.name))}" for f in fields(ShaftSpec)]
    counts: dict[str, int] = {}
    for s in network.segments:
        counts[s.kind.value] = counts.get(s.kind.value, 0) + 1
    lines.append(f"segments: {len(network.segments)}")
    for kind in SegmentKind:
        lines.append(f"segments_{kind.value}: {counts.get(kind.value, 0)}")
    heated = [s for s in network.segments if s.heated]
    lines.append(f"heated_area_m2: {network.total_heated_area:.6g}")
    lines.append(f"interface_area_m2: {spec.interface_area * MM2:.6g}")
    lines.append(f"channel_hydraulic_diameter_m: {heated[0].hydraulic_diameter:.6g}")
    lines.append(f"channel_flow_area_m2: {heated[0].flow_area:.6g}")
    lines.append(f"max_radius_m: {network.max_radius:.6g}")
    return "\n".join(lines) + "\n"


def _fmt(value) -> str:
    if isinstance(value, Enum):
        return str(value.value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)
