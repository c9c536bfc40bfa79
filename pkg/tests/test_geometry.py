import json
import math
from dataclasses import replace

import pytest
from hypothesis import given, settings, strategies as st

from rotorcool.geometry import (
    GeometryError,
    InnerProfile,
    SegmentKind,
    build_network,
    calibrate_fill_fraction,
    default_profile_depth,
    describe,
    heated_channel_area,
    hydraulic_diameter,
    load_spec_json,
    preset,
    shaft_network,
    spec_from_dict,
)

MODELS = (1, 2, 3, 4)
TOOTHED = (2, 3, 4)


def closed_form_fill(spec):
    # A = L * ((1 - f) * pi * Dm + 2 * n * d)  solved for f
    a_per_len = spec.target_heated_area / spec.l_tempfix
    return 1.0 - (a_per_len - 2.0 * spec.n_tooth_channels * spec.profile_depth) / (math.pi * spec.channel_mean_diameter)


# frozen from the closed form above
FROZEN_FILL = {2: 0.413318, 3: 0.700716, 4: 0.401001}


def test_hydraulic_diameter_circle_and_square():
    d = 0.012
    assert hydraulic_diameter(math.pi * d * d / 4, math.pi * d) == pytest.approx(d, rel=1e-15)
    assert hydraulic_diameter(4.0, 8.0) == 2.0
    with pytest.raises(GeometryError):
        hydraulic_diameter(0.0, 1.0)


def test_default_depths():
    assert preset(2).profile_depth == pytest.approx(4.4)
    assert preset(3).profile_depth == pytest.approx(5.5)
    assert preset(4).profile_depth == pytest.approx(4.9)
    assert preset(1).profile_depth is None
    assert default_profile_depth(100.0, 60.0) == 6.0
    assert default_profile_depth(50.0, 49.0) == 1.0


def test_unknown_model():
    with pytest.raises(GeometryError):
        preset(5)


@pytest.mark.parametrize("model", TOOTHED)
def test_fill_matches_closed_form(model):
    spec = calibrate_fill_fraction(preset(model))
    exact = closed_form_fill(preset(model))
    assert exact == pytest.approx(FROZEN_FILL[model], abs=1e-5)
    # bisection tolerance is 1e-3 on area, which bounds the fill error
    assert spec.tooth_fill_fraction == pytest.approx(exact, abs=2e-3)
    assert not spec.fill_clamped


@pytest.mark.parametrize("model", TOOTHED)
def test_heated_area_within_ten_percent(model):
    net = shaft_network(model, 50)
    target = preset(model).interface_area * 1e-6
    assert abs(net.total_heated_area - target) / target <= 0.10
    assert abs(net.total_heated_area - target) / target <= 1e-3


def test_scaled_basis_clamps_fill():
    spec = calibrate_fill_fraction(replace(preset(2), interface_basis="scaled"))
    assert spec.tooth_fill_fraction == 0.8
    assert spec.fill_clamped


def test_calibration_rejects_plain_bore():
    with pytest.raises(GeometryError):
        calibrate_fill_fraction(preset(1))


def test_model3_differs_from_model2_only_in_expected_fields():
    a, b = preset(2).to_dict(), preset(3).to_dict()
    diff = {k for k in a if a[k] != b[k]}
    assert diff == {"model_id", "l_tempfix", "d_in", "d_out", "d_inner", "fix_temp_area",
                    "interface_area", "profile_depth", "inner_profile"}
    assert b["inner_profile"] == "wavy"


@pytest.mark.parametrize("model", MODELS)
def test_network_layout(model):
    n = 40
    net = shaft_network(model, n)
    kinds = [s.kind for s in net.segments]
    assert net.n_axial_segments == n
    if model == 1:
        assert set(kinds) == {SegmentKind.AXIAL_CORE}
        assert len(kinds) == n + 2
        assert not net.segments[0].heated and not net.segments[-1].heated
    else:
        assert kinds[0] is SegmentKind.AXIAL_CORE
        assert kinds[1] is SegmentKind.RADIAL_INLET
        assert kinds[2:-2] == [SegmentKind.TOOTH_CHANNEL] * n
        assert kinds[-2] is SegmentKind.RADIAL_OUTLET
        assert kinds[-1] is SegmentKind.AXIAL_CORE


@pytest.mark.parametrize("model", MODELS)
def test_lengths_add_up(model):
    net = shaft_network(model, 25)
    spec = net.spec
    axial = sum(s.length for s in net.segments if not s.is_radial)
    assert axial == pytest.approx(spec.l_total * 1e-3, rel=1e-12)
    heated = sum(s.length for s in net.segments if s.heated)
    assert heated == pytest.approx(spec.l_tempfix * 1e-3, rel=1e-12)


def test_model4_channel_hand_numbers():
    net = shaft_network(4, 20)
    spec = net.spec
    ch = next(s for s in net.segments if s.kind is SegmentKind.TOOTH_CHANNEL)
    w = (1 - spec.tooth_fill_fraction) * math.pi * (88.2 + 4.9) / 36 * 1e-3
    d = 4.9e-3
    assert ch.mean_radius == pytest.approx(0.04655, rel=1e-12)
    assert ch.flow_area == pytest.approx(36 * w * d, rel=1e-12)
    assert ch.hydraulic_diameter == pytest.approx(4 * w * d / (2 * (w + d)), rel=1e-12)
    inlet = net.segments[1]
    assert inlet.radius_start == pytest.approx(4.5e-3)
    assert inlet.radius_end == pytest.approx(44.1e-3)
    assert net.max_radius == pytest.approx(0.04655, rel=1e-12)


def test_wavy_factors_applied():
    plain = build_network(replace(calibrate_fill_fraction(preset(3)), inner_profile=InnerProfile.SMOOTH), 10)
    wavy = shaft_network(3, 10)
    a, b = plain.segments[2], wavy.segments[2]
    assert b.flow_area == pytest.approx(1.15 * a.flow_area, rel=1e-12)
    assert b.wetted_perimeter == pytest.approx(0.95 * a.wetted_perimeter, rel=1e-12)
    assert b.heat_exchange_area == a.heat_exchange_area


def test_infeasible_depth_rejected():
    spec = replace(preset(2), profile_depth=4.4, min_wall=1.0)
    with pytest.raises(GeometryError):
        build_network(spec, 20)
    with pytest.raises(GeometryError):
        replace(preset(2), profile_depth=7.0)


def test_too_few_segments():
    with pytest.raises(GeometryError):
        shaft_network(2, 5)


def test_spec_json_override(tmp_path):
    path = tmp_path / "g.json"
    path.write_text(json.dumps({"model_id": 2, "n_tooth_channels": 24, "profile_depth": 3.0}))
    spec = load_spec_json(path)
    assert spec.n_tooth_channels == 24 and spec.profile_depth == 3.0
    with pytest.raises(GeometryError):
        spec_from_dict({"model_id": 2, "bogus": 1})


def test_describe_is_stable_and_ordered():
    text = describe(shaft_network(4, 20))
    assert text == describe(shaft_network(4, 20))
    keys = [line.split(":")[0] for line in text.splitlines()]
    assert keys[:3] == ["model_id", "l_total", "l_tempfix"]
    assert keys[-1] == "max_radius_m"
    assert "segments_tooth_channel: 20" in text


@settings(max_examples=60, deadline=None)
@given(
    model=st.sampled_from(TOOTHED),
    teeth=st.integers(min_value=6, max_value=48),
    depth=st.floats(min_value=1.0, max_value=4.4),
    fill=st.floats(min_value=0.2, max_value=0.8),
)
def test_variant_invariants(model, teeth, depth, fill):
    spec = replace(preset(model), n_tooth_channels=teeth, profile_depth=depth, tooth_fill_fraction=fill)
    net = build_network(spec, 10)
    ch = net.segments[2]
    assert ch.hydraulic_diameter > 0
    # a slot of depth d has Dh < 2d; the wavy factors stretch that by 1.15 / 0.95
    assert ch.hydraulic_diameter <= 2 * depth * 1e-3 * 1.15 / 0.95
    assert net.total_heated_area == pytest.approx(heated_channel_area(spec) * 1e-6, rel=1e-12)
    assert all(s.flow_area > 0 and s.length > 0 for s in net.segments)


@settings(max_examples=40, deadline=None)
@given(st.sampled_from(TOOTHED), st.floats(min_value=0.2, max_value=0.8))
def test_heated_area_decreases_with_fill(model, f):
    spec = preset(model)
    assert heated_channel_area(spec, f) > heated_channel_area(spec, min(f + 0.01, 0.99))
