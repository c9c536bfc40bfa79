import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

import rotorcool.solver as solver_mod
from rotorcool.geometry import ChannelNetwork, SegmentKind, preset, shaft_network
from rotorcool.properties import DEFAULT_FLUID, fluid_at
from rotorcool.solver import (
    RPM_TO_RAD_S,
    OperatingPoint,
    SolverConfig,
    SolverError,
    centrifugal_delta_p,
    friction_factor,
    grid_convergence,
    heat_transfer_rate,
    march,
    nusselt,
    rotational_reynolds,
    tangential_velocity,
)

BASE = OperatingPoint(10000, 5, 80)


@pytest.fixture(scope="module")
def nets():
    return {m: shaft_network(m, 100) for m in (1, 2, 3, 4)}


# -- closed forms, checked against hand arithmetic ----------------------------


def test_centrifugal_hand_value():
    assert centrifugal_delta_p(800.0, 1000.0, 0.01, 0.02) == pytest.approx(120000.0, rel=1e-14)
    assert centrifugal_delta_p(800.0, 0.0, 0.01, 0.02) == 0.0
    with pytest.raises(ValueError):
        centrifugal_delta_p(800.0, 1.0, 0.02, 0.01)


def test_tangential_velocity_hand_value():
    omega = 10000 * RPM_TO_RAD_S
    assert omega == pytest.approx(1047.1975511965977, rel=1e-15)
    assert tangential_velocity(omega, 0.0441) == pytest.approx(46.18141200776996, rel=1e-14)


def test_rotational_reynolds():
    assert rotational_reynolds(800.0, 100.0, 0.01, 0.004) == pytest.approx(2000.0, rel=1e-14)


def test_heat_rate_hand_value():
    # 800.8 kg/m3 * 5 l/min * 2130 J/(kg K) * 1 K
    assert heat_transfer_rate(800.8, 5e-3 / 60, 2130.0, 81.0, 80.0) == pytest.approx(142.142, rel=1e-12)
    with pytest.raises(ValueError):
        heat_transfer_rate(800.0, 0.0, 2000.0, 81.0, 80.0)


def test_friction_regimes():
    assert friction_factor(1000.0) == pytest.approx(0.064, rel=1e-15)
    assert friction_factor(10000.0) == pytest.approx(0.0316, rel=1e-12)
    mid = 0.5 * 64 / 3150 + 0.5 * 0.316 * 3150 ** -0.25
    assert friction_factor(3150.0) == pytest.approx(mid, rel=1e-14)
    # rotation multiplier (1 + 0.1 * 5000 / 1000) ** 0.5
    assert friction_factor(1000.0, 5000.0) == pytest.approx(0.064 * math.sqrt(1.5), rel=1e-14)
    off = SolverConfig(friction_rotation=False)
    assert friction_factor(1000.0, 5000.0, off) == friction_factor(1000.0)
    with pytest.raises(ValueError):
        friction_factor(0.0)


def test_nusselt_regimes():
    assert nusselt(500.0, 50.0) == 3.66
    assert nusselt(10000.0, 1.0) == pytest.approx(0.023 * 10000 ** 0.8, rel=1e-14)
    # laminar floor: ratio = Re_rot / 2300
    assert nusselt(500.0, 50.0, 4600.0) == pytest.approx(3.66 * 2.0 ** 0.4, rel=1e-14)
    axial = SolverConfig(nusselt_rotation_reference="axial")
    assert nusselt(499.0, 50.0, 2500.0, axial) == pytest.approx(3.66 * 3.5 ** 0.4, rel=1e-14)
    with pytest.raises(ValueError):
        nusselt(100.0, 0.0)


@given(st.floats(min_value=1.0, max_value=1e6), st.floats(min_value=0.0, max_value=1e6))
def test_friction_positive_and_rotation_only_raises(Re, Re_rot):
    f0 = friction_factor(Re)
    f = friction_factor(Re, Re_rot)
    assert f0 > 0 and f >= f0


@given(st.floats(min_value=2300.0, max_value=4000.0), st.floats(min_value=2300.0, max_value=4000.0))
def test_blend_stays_between_branches(a, b):
    for Re in (a, b):
        lam, turb = 64 / Re, 0.316 * Re ** -0.25
        for mode in ("linear", "smoothstep"):
            f = friction_factor(Re, cfg=SolverConfig(blend_mode=mode))
            assert min(lam, turb) - 1e-15 <= f <= max(lam, turb) + 1e-15


# -- march ---------------------------------------------------------------------


def test_single_segment_matches_ntu_formula():
    net = shaft_network(1, 10)
    seg = replace(net.segments[1])
    one = ChannelNetwork((seg,), net.spec)
    cfg = SolverConfig(constant_properties=True, rotation=False)
    op = OperatingPoint(0, 5, 80)
    res = march(one, op, cfg)
    fs = fluid_at(DEFAULT_FLUID, 80.0)
    v = op.flow_m3_s / seg.flow_area
    Re = fs.density * v * seg.hydraulic_diameter / fs.dynamic_viscosity
    assert Re < 2300
    h = 3.66 * fs.thermal_conductivity / seg.hydraulic_diameter
    U = 1 / (1 / h + seg.wall_conduction_length / 45.77)
    ntu = U * seg.heat_exchange_area / (fs.density * op.flow_m3_s * fs.specific_heat)
    expected = 100 - 20 * math.exp(-ntu)
    assert res.outlet_temperature == pytest.approx(expected, rel=1e-14)


def test_model1_pressure_is_hagen_poiseuille():
    net = shaft_network(1, 50)
    cfg = SolverConfig(constant_properties=True, rotation=False)
    res = march(net, OperatingPoint(0, 5, 80), cfg)
    mu = fluid_at(DEFAULT_FLUID, 80.0).dynamic_viscosity
    d, L, Q = 18e-3, 340.35e-3, 5e-3 / 60
    expected = 128 * mu * L * Q / (math.pi * d ** 4)
    assert res.max_gauge_pressure == pytest.approx(expected, rel=1e-12)
    assert res.inlet_gauge_pressure == pytest.approx(expected, rel=1e-12)


def test_centrifugal_bookkeeping(nets):
    res = march(nets[2], BASE)
    segs = nets[2].segments
    inlet = res.per_segment[1]
    rho = inlet.density
    r1, r2 = segs[1].radius_start, segs[1].radius_end
    assert inlet.centrifugal_dp == pytest.approx(centrifugal_delta_p(rho, BASE.omega, r1, r2), rel=1e-14)
    assert res.per_segment[-2].centrifugal_dp < 0
    assert res.per_segment[-1].gauge_pressure == pytest.approx(res.per_segment[-1].friction_dp, rel=1e-14)


@pytest.mark.parametrize("model", (1, 2, 3, 4))
def test_energy_closure(nets, model):
    res = march(nets[model], BASE)
    assert res.converged
    assert abs(res.segment_heat_sum - res.total_heat_rate) <= 1e-9 * abs(res.total_heat_rate)


def test_regression_baseline(nets):
    # frozen from a 200-segment solve; guards against silent model drift
    net = shaft_network(4, 200)
    res = march(net, BASE)
    assert res.total_heat_rate == pytest.approx(216.1, rel=2e-3)
    assert res.max_gauge_pressure / 1e5 == pytest.approx(8.094, rel=2e-3)
    ch = next(s for s in res.per_segment if s.kind is SegmentKind.TOOTH_CHANNEL)
    assert ch.tangential_velocity == pytest.approx(10000 * RPM_TO_RAD_S * 0.04655, rel=1e-12)
    assert res.max_velocity == pytest.approx(math.hypot(ch.axial_velocity, ch.tangential_velocity), rel=1e-12)


def test_midpoint_needs_iterations_and_cap(nets):
    mid = SolverConfig(bulk_evaluation="midpoint")
    res = march(nets[2], BASE, mid)
    assert res.converged and res.iterations > 2
    capped = march(nets[2], BASE, replace(mid, max_iterations=1))
    assert not capped.converged and capped.iterations == 1


def test_upwind_converges_in_two_sweeps(nets):
    res = march(nets[3], BASE)
    assert res.converged and res.iterations == 2


def test_non_finite_raises(nets, monkeypatch):
    monkeypatch.setattr(solver_mod, "nusselt", lambda *a, **k: math.nan)
    with pytest.raises(SolverError):
        march(nets[2], BASE)


def test_operating_point_validation():
    with pytest.raises(ValueError):
        OperatingPoint(1000, 0, 80)
    with pytest.raises(ValueError):
        OperatingPoint(-1, 5, 80)
    with pytest.raises(ValueError):
        OperatingPoint(1000, 5, 100)


def test_config_from_dict_type_checks():
    assert SolverConfig.from_dict({"tolerance": 1e-8, "rotation": False}).rotation is False
    for bad in ({"rotation": "false"}, {"max_iterations": 2.5}, {"tolerance": "x"}, {"nope": 1}):
        with pytest.raises(ValueError):
            SolverConfig.from_dict(bad)
    with pytest.raises(ValueError):
        SolverConfig(blend_mode="cubic")
    cfg = SolverConfig(property_mode="film")
    assert SolverConfig.from_dict(cfg.to_dict()) == cfg


def test_grid_convergence_validation(nets):
    with pytest.raises(ValueError):
        grid_convergence(lambda n: shaft_network(2, n), BASE, [])
    with pytest.raises(ValueError):
        grid_convergence(lambda n: shaft_network(2, n), BASE, [200, 100])


def test_film_mode_runs(nets):
    res = march(nets[4], BASE, SolverConfig(property_mode="film"))
    assert res.converged and res.total_heat_rate > 0


@settings(max_examples=40, deadline=None)
@given(
    model=st.sampled_from((1, 2, 3, 4)),
    rpm=st.floats(min_value=0, max_value=18000),
    flow=st.floats(min_value=3, max_value=6),
    t_in=st.floats(min_value=50, max_value=80),
)
def test_march_invariants(nets, model, rpm, flow, t_in):
    res = march(nets[model], OperatingPoint(rpm, flow, t_in))
    assert res.converged
    assert min(t_in, 65.0) - 1e-9 <= res.outlet_temperature <= 100.0
    for s in res.per_segment:
        assert min(t_in, 65.0) - 1e-9 <= s.outlet_temperature <= 100.0
    assert abs(res.segment_heat_sum - res.total_heat_rate) <= 1e-6 * max(1.0, abs(res.total_heat_rate))
    assert res.max_gauge_pressure >= res.inlet_gauge_pressure - 1e-9
    assert res.max_gauge_pressure >= 0.0
    omega = rpm * RPM_TO_RAD_S
    r = nets[model].max_radius
    outer = [s for s, seg in zip(res.per_segment, nets[model].segments) if seg.mean_radius == r]
    assert all(s.tangential_velocity == omega * r for s in outer)
