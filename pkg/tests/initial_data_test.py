from __future__ import annotations

from collections.abc import Callable
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from worldsheet.enums import DerivativeScheme, Provenance, ViolationKind
from worldsheet.exceptions import AdmissibilityError, ContractViolation, SurfaceFormatError
from worldsheet.initial_data import (
    InitialCurve,
    circle,
    conformalize,
    ellipse,
    fourier_eval,
    image_distance,
    line,
    load_node_file,
    null_decompose,
    orthogonalize,
    spectral_derivative,
    validate,
)
from worldsheet.target_manifold import MetricSpec, flip_norm_at, inner_at


def _kinds(metric: MetricSpec, curve: InitialCurve, **kwargs: object) -> set[ViolationKind]:
    return {v.kind for v in validate(metric, curve, **kwargs)}


def test_unit_circle_is_admissible(minkowski: MetricSpec, flrw: MetricSpec):
    assert validate(minkowski, circle(64)) == []
    assert validate(flrw, circle(64)) == []


def test_ellipse_fails_only_the_norm_condition(minkowski: MetricSpec):
    assert _kinds(minkowski, ellipse(64)) == {ViolationKind.NORM_MISMATCH}


def test_tilted_velocity_is_not_orthogonal(minkowski: MetricSpec):
    curve = circle(32)
    k1 = curve.k1.copy()
    k1[:, 1] = 0.3
    tilted = InitialCurve(curve.k0, k1)
    kinds = _kinds(minkowski, tilted)
    assert ViolationKind.NOT_ORTHOGONAL in kinds
    assert ViolationKind.NOT_TIMELIKE not in kinds


def test_projection_restores_orthogonality(minkowski: MetricSpec):
    curve = circle(32)
    k1 = curve.k1.copy()
    k1[:, 1] = 0.3
    fixed = orthogonalize(minkowski, InitialCurve(curve.k0, k1))
    assert ViolationKind.NOT_ORTHOGONAL not in _kinds(minkowski, fixed)


def test_past_directed_and_degenerate_data(minkowski: MetricSpec):
    curve = circle(16)
    kinds = _kinds(minkowski, curve.time_reversed())
    assert ViolationKind.PAST_DIRECTED in kinds

    # k1 = k0′ is lightlike on both sides: k1 − k0′ vanishes
    null = InitialCurve(curve.k0, curve.tangent())
    kinds = _kinds(minkowski, null)
    assert {ViolationKind.NOT_TIMELIKE, ViolationKind.DEGENERATE} <= kinds


def test_weak_validation_accepts_lightlike_velocity(minkowski: MetricSpec):
    curve = circle(16)
    k1 = np.tile([0.5, 0.5, 0.0], (16, 1))
    lightlike = InitialCurve(curve.k0, k1)
    assert ViolationKind.NOT_TIMELIKE in _kinds(minkowski, lightlike)
    assert ViolationKind.NOT_TIMELIKE not in _kinds(minkowski, lightlike, strict=False)


@pytest.mark.parametrize("metric_name", ["minkowski", "flrw"])
def test_conformalized_ellipse_is_conformal(metric_name: str, request: pytest.FixtureRequest):
    metric: MetricSpec = request.getfixturevalue(metric_name)
    out = conformalize(metric, ellipse(128, (1.5, 1.0)))
    assert out.provenance is Provenance.CONFORMALIZED
    assert out.period == pytest.approx(2 * np.pi)
    ds = out.tangent()
    defect = inner_at(metric, out.k0, ds, ds) + inner_at(metric, out.k0, out.k1, out.k1)
    assert np.max(np.abs(defect)) <= 1e-8
    assert validate(metric, out) == []


def test_conformalize_keeps_conformal_data(minkowski: MetricSpec):
    curve = circle(64)
    out = conformalize(minkowski, curve)
    np.testing.assert_allclose(out.k0, curve.k0, atol=1e-12)
    assert out.scale == pytest.approx(1.0)


def test_conformalize_preserves_the_image(minkowski: MetricSpec, flrw: MetricSpec):
    curve = ellipse(128, (1.5, 1.0))
    for metric in (minkowski, flrw):
        assert image_distance(metric, curve, conformalize(metric, curve)) <= 1e-6
    assert image_distance(minkowski, curve, ellipse(128, (1.6, 1.0))) > 0.05


def test_conformalize_is_idempotent(minkowski: MetricSpec):
    once = conformalize(minkowski, ellipse(128, (1.5, 1.0)))
    twice = conformalize(minkowski, once)
    assert np.max(flip_norm_at(minkowski, once.k0, twice.k0 - once.k0)) <= 1e-8
    assert twice.scale == pytest.approx(once.scale, rel=1e-8)


def test_radius_two_circle_is_rescaled(minkowski: MetricSpec):
    curve = circle(64, radius=2.0)
    out = conformalize(minkowski, curve)
    assert out.scale == pytest.approx(2.0, rel=1e-12)
    assert out.period == pytest.approx(2 * np.pi)
    np.testing.assert_allclose(out.k0, curve.k0, atol=1e-10)
    np.testing.assert_allclose(out.k1, np.tile([2.0, 0.0, 0.0], (64, 1)), atol=1e-12)


def test_conformalize_rejects_non_orthogonal_data(minkowski: MetricSpec):
    curve = circle(32)
    k1 = curve.k1.copy()
    k1[:, 2] = 0.2
    with pytest.raises(AdmissibilityError, match="orthogonal"):
        _ = conformalize(minkowski, InitialCurve(curve.k0, k1))


def test_null_decomposition_of_conformal_data(flrw: MetricSpec):
    curve = circle(64)
    nulls = null_decompose(flrw, curve)
    assert np.max(np.abs(inner_at(flrw, curve.k0, nulls.u, nulls.u))) < 1e-12
    assert np.max(np.abs(inner_at(flrw, curve.k0, nulls.v, nulls.v))) < 1e-12
    np.testing.assert_allclose(0.5 * (nulls.u + nulls.v), curve.k1)
    np.testing.assert_allclose(nulls.u - nulls.v, 2.0 * curve.tangent(), atol=1e-14)
    # |u|_h = |v|_h = √2 for the unit circle; the slope term is the same size
    assert nulls.u_bound == pytest.approx(np.sqrt(2.0))
    assert nulls.norm_sum == pytest.approx(2 * np.sqrt(2.0))


def test_line_winds_once(minkowski: MetricSpec):
    curve = line(16)
    assert curve.winding.tolist() == [0.0, 2 * np.pi, 0.0]
    np.testing.assert_allclose(curve.tangent(), np.tile([0.0, 1.0, 0.0], (16, 1)), atol=1e-12)
    assert validate(minkowski, curve) == []


@settings(max_examples=25, deadline=None)
@given(mode=st.integers(min_value=1, max_value=7), phase=st.floats(min_value=0.0, max_value=6.0))
def test_spectral_derivative_is_exact_below_nyquist(mode: int, phase: float):
    x = np.arange(16) * 2 * np.pi / 16
    values = np.sin(mode * x + phase)
    expected = mode * np.cos(mode * x + phase)
    np.testing.assert_allclose(spectral_derivative(values, 2 * np.pi), expected, atol=1e-11)


def test_fd4_scheme_is_fourth_order():
    errors = []
    for n in (32, 64):
        curve = InitialCurve(circle(n).k0, circle(n).k1, scheme=DerivativeScheme.FD4)
        exact = np.stack([np.zeros(n), np.cos(curve.x), -np.sin(curve.x)], axis=1)
        errors.append(np.max(np.abs(curve.tangent() - exact)))
    assert 14.0 < errors[0] / errors[1] < 18.0


def test_resampling_preserves_band_limited_curves():
    curve = ellipse(16, (1.5, 0.5))
    fine = curve.resampled(64)
    np.testing.assert_allclose(fine.k0, ellipse(64, (1.5, 0.5)).k0, atol=1e-12)
    x = np.array([0.1, 2.0])
    np.testing.assert_allclose(fourier_eval(curve.k0[:, 1], 2 * np.pi, x), 1.5 * np.sin(x), atol=1e-12)


def test_perturbation_drops_the_conformal_tag(minkowski: MetricSpec):
    curve = conformalize(minkowski, circle(32))
    bumped = curve.perturbed(1e-3, component=1, mode=2)
    assert bumped.provenance is Provenance.RAW
    assert np.max(np.abs(bumped.k0 - curve.k0)) == pytest.approx(1e-3, rel=1e-2)
    with pytest.raises(ContractViolation):
        _ = curve.perturbed(1e-3, component=5)


def test_curve_shape_checks():
    with pytest.raises(ValueError, match="power of two"):
        _ = InitialCurve(np.zeros((12, 3)), np.zeros((12, 3)))
    with pytest.raises(ValueError, match="equal shape"):
        _ = InitialCurve(np.zeros((16, 3)), np.zeros((16, 2)))


def test_node_file_round_trip(write_nodes: Callable[..., Path], minkowski: MetricSpec):
    curve = circle(32)
    loaded = load_node_file(write_nodes(curve.k0, curve.k1), 3)
    np.testing.assert_array_equal(loaded.k0, curve.k0)
    np.testing.assert_array_equal(loaded.k1, curve.k1)
    assert validate(minkowski, loaded) == []


def test_node_file_errors(tmp_path: Path, write_nodes: Callable[..., Path]):
    bad = tmp_path / "bad.txt"
    _ = bad.write_text("0.0 1.0 2.0\n", encoding="utf-8")
    with pytest.raises(SurfaceFormatError, match="expected 7 values"):
        _ = load_node_file(bad, 3)

    curve = circle(16)
    path = write_nodes(curve.k0[:12], curve.k1[:12])
    with pytest.raises(SurfaceFormatError):
        _ = load_node_file(path, 3)

    empty = tmp_path / "empty.txt"
    _ = empty.write_text("# nothing\n\n", encoding="utf-8")
    with pytest.raises(SurfaceFormatError, match="no nodes"):
        _ = load_node_file(empty, 3)

    with pytest.raises(SurfaceFormatError):
        _ = load_node_file(tmp_path / "missing.txt", 3)
