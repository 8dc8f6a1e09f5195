from __future__ import annotations

import logging
import math

import attr
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from worldsheet.char_solver import (
    LatticeFront,
    SolutionSurface,
    SolverSettings,
    StepEstimate,
    continue_to_time,
    picard_strip_solve,
    shifted,
    solve_backward,
    start_lattice,
    strip_estimate,
    transport_step,
    wave_map_residual,
)
from worldsheet.diagnostics import analytic_oracle, null_drift, oracle_error
from worldsheet.exceptions import (
    AdmissibilityError,
    ContractViolation,
    DegenerateDataError,
    NonConvergenceError,
    SolverFailure,
    SurfaceStallError,
)
from worldsheet.initial_data import InitialCurve, circle, ellipse, line, null_decompose
from worldsheet.target_manifold import (
    MetricSpec,
    ScaleFactor,
    ScaleFactorKind,
    bounding_region,
    flip_norm_at,
    inner_at,
    metric_eval,
    sample_bounds,
)


def test_strip_constants_from_hand_computed_inputs():
    est = StepEstimate.from_constants(math.inf, 0.0, 1.0, 2.0, 2.0, 0.01)
    assert est.L == 0.2
    assert est.l == pytest.approx(0.05, rel=1e-15)
    assert est.K == pytest.approx(240.0, rel=1e-15)
    assert est.K_prime == 16.0
    assert est.n_rows == 3


@pytest.mark.parametrize(
    ("radius", "bound", "delta", "expected"),
    [
        (1.0, 0.0, 10.0, 0.2),
        (math.inf, 1.0 / 11.0, 10.0, 1.0),
        (math.inf, 0.5, 0.05, 0.01),
    ],
)
def test_strip_length_takes_the_smallest_limit(radius: float, bound: float, delta: float, expected: float):
    est = StepEstimate.from_constants(radius, bound, delta, 1.0, 1.0, 1e-3)
    assert est.L == pytest.approx(expected)
    assert est.l == pytest.approx(expected / 2.0)


@given(
    u=st.floats(min_value=0.01, max_value=100.0),
    v=st.floats(min_value=0.01, max_value=100.0),
    h=st.floats(min_value=1e-4, max_value=1.0),
)
def test_strip_rows_never_exceed_the_admissible_height(u: float, v: float, h: float):
    est = StepEstimate.from_constants(math.inf, 0.3, 1.0, u, v, h)
    assert est.n_rows >= 1
    assert est.clamped == (est.n_rows * h > est.l / math.sqrt(2.0))
    if est.n_rows > 1:
        assert est.n_rows * h <= est.l / math.sqrt(2.0) * (1.0 + 1e-12)


def test_vanishing_data_cannot_size_a_strip():
    with pytest.raises(DegenerateDataError):
        _ = StepEstimate.from_constants(math.inf, 0.0, 1.0, 0.0, 0.0, 0.1)
    with pytest.raises(ContractViolation):
        _ = StepEstimate.from_constants(math.inf, 0.0, 0.0, 1.0, 1.0, 0.1)


def test_minkowski_circle_agrees_with_the_closed_form(
    minkowski: MetricSpec, minkowski_runs: dict[int, SolutionSurface]
):
    errors = {}
    for n, s in minkowski_runs.items():
        assert float(np.min(s.y[-1, :, 0])) >= 1.2
        errors[n] = oracle_error(minkowski, s, analytic_oracle("minkowski-circle", n, s.n_rows))
    assert errors[256] <= 5e-4
    assert 3.4 <= errors[256] / errors[512] <= 4.6


def test_flat_line_is_reproduced_to_roundoff(minkowski: MetricSpec):
    s = continue_to_time(minkowski, line(32), 1.0)
    reference = analytic_oracle("flat-linear", 32, s.n_rows)
    assert oracle_error(minkowski, s, reference) <= 1e-12
    assert s.winding.tolist() == [0.0, 2 * math.pi, 0.0]


def test_two_picard_seeds_reach_the_same_surface(flrw: MetricSpec):
    curve = circle(64)
    plain = continue_to_time(flrw, curve, 0.5, SolverSettings())
    seeded = continue_to_time(flrw, curve, 0.5, SolverSettings(seed_perturbation=True))
    assert plain.n_rows == seeded.n_rows
    assert np.max(np.abs(plain.y - seeded.y)) <= 1e-9


def test_fixed_point_of_the_special_solution():
    """Data with u ≡ 0 are a fixed point of the strip solve, curved target included."""
    metric = MetricSpec.flrw(3, ScaleFactor(ScaleFactorKind.EXPONENTIAL, rate=0.3))
    base = circle(32)
    curve = InitialCurve(base.k0, -base.tangent())
    nulls = null_decompose(metric, curve)
    np.testing.assert_array_equal(nulls.u, 0.0)

    h = curve.h
    # y is constant along ξ: row i is the initial curve shifted i nodes
    y = np.stack([np.roll(curve.k0, i, axis=0) for i in range(5)])
    v = (y - np.roll(y, -2, axis=1)) / h
    front = LatticeFront(0, h, y[0], nulls.u, v[0], curve.winding)
    est = StepEstimate.from_constants(math.inf, 0.0, 12.0, 1.0, 1.0, h)
    assert est.n_rows == 4

    solution, state = picard_strip_solve(metric, front, est)
    assert state.converged
    assert state.iterations <= 3
    np.testing.assert_allclose(solution.y, y[1:], rtol=0.0, atol=1e-13)
    np.testing.assert_allclose(solution.v, v[1:], rtol=0.0, atol=1e-12)
    np.testing.assert_array_equal(solution.u, 0.0)


def test_picard_state_contracts(flrw: MetricSpec):
    curve = circle(64)
    nulls = null_decompose(flrw, curve)
    front = start_lattice(flrw, curve, nulls)
    est = StepEstimate.from_constants(math.inf, 0.2, 0.5, nulls.u_bound, nulls.v_bound, curve.h)
    solution, state = picard_strip_solve(flrw, front, est)
    assert state.converged
    assert state.change <= 1e-10
    assert all(r < 0.9 for r in state.ratios)
    assert state.symmetric_defect(flrw) <= 1e-9
    assert solution.n_rows == est.n_rows
    assert solution.front(curve.h, curve.winding).row == front.row + est.n_rows


def test_picard_gives_up_after_max_iter(flrw: MetricSpec):
    curve = circle(32)
    nulls = null_decompose(flrw, curve)
    front = start_lattice(flrw, curve, nulls)
    est = StepEstimate.from_constants(math.inf, 0.2, 0.5, nulls.u_bound, nulls.v_bound, curve.h)
    with pytest.raises(NonConvergenceError, match="did not converge in 1 sweeps"):
        _ = picard_strip_solve(flrw, front, est, tol=1e-14, max_iter=1)


def test_failures_carry_the_partial_surface(minkowski: MetricSpec):
    with pytest.raises(SurfaceStallError) as excinfo:
        _ = continue_to_time(minkowski, circle(32), 1.0, SolverSettings(max_rows=3))
    partial = excinfo.value.partial
    assert isinstance(excinfo.value, SolverFailure)
    assert partial is not None
    assert 1 <= partial.n_rows <= 4


def test_non_conformal_data_need_the_plain_wave_map_path(minkowski: MetricSpec):
    curve = ellipse(32)
    with pytest.raises(AdmissibilityError):
        _ = continue_to_time(minkowski, curve, 0.5)
    s = continue_to_time(minkowski, curve, 0.5, SolverSettings(require_conformal=False))
    assert float(np.min(s.y[-1, :, 0])) >= 0.5


def test_target_must_lie_ahead(minkowski: MetricSpec):
    with pytest.raises(ContractViolation):
        _ = continue_to_time(minkowski, circle(16), 0.0)
    with pytest.raises(ContractViolation):
        _ = solve_backward(minkowski, circle(16), 0.5)


def test_backward_solve_mirrors_the_forward_one(minkowski: MetricSpec):
    curve = circle(64)
    forward = continue_to_time(minkowski, curve, 0.5)
    backward = solve_backward(minkowski, curve, -0.5)
    assert backward.time_orientation == -1
    assert backward.t[0] == 0.0
    assert np.all(np.diff(backward.t) < 0)
    assert float(np.max(backward.y[-1, :, 0])) <= -0.5
    # the circle collapses symmetrically in t
    rows = min(forward.n_rows, backward.n_rows)
    np.testing.assert_allclose(backward.y[:rows, :, 1:], forward.y[:rows, :, 1:], atol=1e-12)
    np.testing.assert_allclose(backward.y[:rows, :, 0], -forward.y[:rows, :, 0], atol=1e-12)


def test_backward_surface_is_future_directed(flrw: MetricSpec):
    s = solve_backward(flrw, circle(64), -0.5)
    assert np.all(s.y_t[..., 0] > 0.0)


def test_surface_time_reflection_is_an_involution(minkowski_runs: dict[int, SolutionSurface]):
    s = minkowski_runs[256]
    twice = s.time_reflected().time_reflected()
    for a, b in ((s.y, twice.y), (s.u, twice.u), (s.v, twice.v), (s.t, twice.t)):
        np.testing.assert_array_equal(a, b)


def test_residual_is_second_order(flrw: MetricSpec, flrw_run: SolutionSurface, flrw_run_coarse: SolutionSurface):
    coarse = float(np.nanmax(wave_map_residual(flrw, flrw_run_coarse)))
    fine = float(np.nanmax(wave_map_residual(flrw, flrw_run)))
    assert 3.0 <= coarse / fine <= 5.5
    # the fine run sampled on the coarse lattice carries only the stencil's own error
    sampled = attr.evolve(
        flrw_run,
        h=2.0 * flrw_run.h,
        t=flrw_run.t[::2],
        y=flrw_run.y[::2, ::2],
        u=flrw_run.u[::2, ::2],
        v=flrw_run.v[::2, ::2],
        valid=flrw_run.valid[::2, ::2],
        strips=(),
    )
    assert coarse <= 10.0 * float(np.nanmax(wave_map_residual(flrw, sampled)))


def test_start_row_is_null_on_a_flat_target(minkowski: MetricSpec, minkowski_runs: dict[int, SolutionSurface]):
    curve = circle(64)
    nulls = null_decompose(minkowski, curve)
    front = start_lattice(minkowski, curve, nulls)
    for edges in (front.u, front.v):
        assert np.max(np.abs(inner_at(minkowski, front.y, edges, edges))) <= 1e-14
    # both edge integrations reach the same node
    np.testing.assert_allclose(front.y, shifted(curve.k0, 1) + curve.h * front.v, rtol=0.0, atol=1e-14)
    # the exact circle comes back with its time axis stretched by sin(h)/h
    np.testing.assert_allclose(front.u, nulls.u * math.sin(curve.h) / curve.h, rtol=1e-13, atol=1e-15)

    plain = start_lattice(minkowski, curve, nulls, null_edges=False)
    np.testing.assert_array_equal(plain.u, nulls.u)
    assert np.max(np.abs(inner_at(minkowski, plain.y, plain.v, plain.v))) > 1e-3
    assert null_drift(minkowski, minkowski_runs[256]).max_drift <= 1e-12


def test_strips_stay_inside_their_bounds(flrw_run: SolutionSurface, flrw: MetricSpec):
    assert flrw_run.strips
    for record in flrw_run.strips:
        assert record.n_rows == record.estimate.n_rows
        assert record.estimate.height_ratio >= 0.5
        assert record.c0_within_bound
    assert np.max(flip_norm_at(flrw, flrw_run.y, flrw_run.u)) <= max(r.estimate.K_prime for r in flrw_run.strips)


def test_auto_delta_strips_are_clamped_and_say_so(minkowski: MetricSpec, caplog: pytest.LogCaptureFixture):
    with caplog.at_level(logging.DEBUG, logger="worldsheet.char_solver"):
        s = continue_to_time(minkowski, circle(32), 0.3)
    assert s.strips
    for record in s.strips:
        assert record.n_rows == 1
        assert record.clamped
        assert record.clamped == record.estimate.clamped
    solved = [r.getMessage() for r in caplog.records if "event=strip.solved" in r.getMessage()]
    assert len(solved) == len(s.strips)
    assert all('"clamped":true' in m for m in solved)


def test_shift_adds_the_winding():
    values = np.arange(6.0).reshape(3, 2)
    w = np.array([3.0, 0.0])
    np.testing.assert_array_equal(shifted(values, 0, w), values)
    np.testing.assert_array_equal(shifted(shifted(values, 1, w), -1, w), values)


def test_flat_transport_is_the_identity(minkowski: MetricSpec):
    u = np.array([[1.0, 0.3, -0.7], [2.0, 0.0, 1.5]])
    v = np.array([[1.0, -1.0, 0.0], [1.0, 0.0, 1.0]])
    y = np.zeros((2, 3))
    out = transport_step(minkowski, u, (y, y + 0.1 * v), (v, v), 0.1)
    np.testing.assert_array_equal(out, u)


def test_flrw_transport_step_in_closed_form():
    rate = 0.5
    metric = MetricSpec.flrw(3, ScaleFactor(ScaleFactorKind.EXPONENTIAL, rate=rate))
    h = 0.01
    u = np.array([[1.0, 0.0, 0.0]])
    v = np.array([[0.0, 1.0, 0.0]])
    y = np.zeros((1, 3))
    out = transport_step(metric, u, (y, y + h * v), (v, v), h)
    expected = np.array([[1.0 + 0.5 * (h * rate) ** 2, -h * rate, 0.0]])
    np.testing.assert_allclose(out, expected, rtol=1e-12, atol=1e-15)


def test_transport_keeps_the_norm_to_third_order():
    metric = MetricSpec.flrw(3, ScaleFactor(ScaleFactorKind.EXPONENTIAL, rate=0.5))
    u = np.array([[1.0, 0.2, 0.7]])
    v = np.array([[1.0, 0.5, 0.0]])
    y = np.array([[0.3, 0.0, 0.0]])

    def defect(h: float) -> float:
        out = transport_step(metric, u, (y, y + h * v), (v, v), h)
        start = np.einsum("mi,mij,mj->m", u, metric_eval(metric, y), u)
        end = np.einsum("mi,mij,mj->m", out, metric_eval(metric, y + h * v), out)
        return float(abs(end - start)[0])

    coarse, fine = defect(0.1), defect(0.05)
    assert coarse < 1e-2
    assert coarse / fine > 6.0


def test_strip_estimate_on_the_flat_line(minkowski: MetricSpec):
    curve = line(16)
    front = start_lattice(minkowski, curve, null_decompose(minkowski, curve))
    bounds = sample_bounds(minkowski, bounding_region(front.y, 1.0))
    est = strip_estimate(minkowski, front, bounds, 1.0)
    assert est.u_bound == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert est.v_bound == pytest.approx(math.sqrt(2.0), rel=1e-14)
    assert est.christoffel_bound == 0.0
    assert est.L == pytest.approx(0.2, rel=1e-15)
    assert est.l == pytest.approx(0.2 / (2.0 * math.sqrt(2.0)), rel=1e-14)
    assert est.K_prime == pytest.approx(8.0 * math.sqrt(2.0), rel=1e-14)
    assert est.n_rows == 1


def test_strip_estimate_needs_the_front_inside_the_bounds(minkowski: MetricSpec):
    curve = line(16)
    front = start_lattice(minkowski, curve, null_decompose(minkowski, curve))
    far = (np.full(3, 100.0), np.full(3, 101.0))
    with pytest.raises(ContractViolation, match="chart region"):
        _ = strip_estimate(minkowski, front, sample_bounds(minkowski, far), 1.0)
