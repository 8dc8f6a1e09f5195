"""
End-to-end runs and studies: validate, conformalize, solve, diagnose, export.

Every entry point returns a report whose `status` carries the exit code;
validation and solver failures are caught here and recorded, with the
partial surface exported for post-mortem when the solver gave up midway.
"""

from __future__ import annotations

import logging
import math
import time
from collections.abc import Mapping, Sequence
from pathlib import Path
from typing import Any

import attr
import numpy as np

from .char_solver import SolutionSurface, StripRecord, continue_to_time, solve_backward
from .config import RunConfig, echo_config
from .converters import get_converter
from .diagnostics import (
    DiagnosticsSummary,
    analytic_oracle,
    energy_stability,
    null_drift,
    oracle_error,
    summarize,
)
from .enums import StudyMode, SuccessStatus
from .events import SolverEvent, log_event
from .exceptions import AdmissibilityError, ContractViolation, SolverFailure, ValidationError
from .export import diagnostics_payload, write_diagnostics, write_json, write_surface, write_table
from .initial_data import (
    InitialCurve,
    Violation,
    conformalize,
    orthogonalize,
    validate,
)
from .target_manifold import MetricSpec, flip_norm_at

logger = logging.getLogger(__name__)

REPORT_NAME = "run_report.json"
TIMING_NAME = "timing.json"
DIAGNOSTICS_NAME = "diagnostics.json"
STUDY_TABLE_NAME = "study_table.csv"
STUDY_REPORT_NAME = "study_report.json"

# errors at or below this are reported as "exact" rather than given an order
EXACT_ERROR = 1e-12

_converter = get_converter()


@attr.define(frozen=True)
class RunReport:
    config: Mapping[str, Any]
    status: SuccessStatus
    direction: str
    target_time: float
    rows: int
    reached_time: float | None
    reference: str | None
    violations: tuple[str, ...]
    strips: tuple[StripRecord, ...]
    diagnostics: Mapping[str, Any] | None
    failure: BaseException | None
    artifacts: Mapping[str, str]

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    def payload(self) -> dict[str, Any]:
        return _converter.to_payload(self)


@attr.define(frozen=True)
class StudyReport:
    mode: StudyMode
    config: Mapping[str, Any]
    status: SuccessStatus
    table: tuple[Mapping[str, Any], ...]
    flags: tuple[str, ...]
    artifacts: Mapping[str, str]

    @property
    def exit_code(self) -> int:
        return self.status.exit_code

    def payload(self) -> dict[str, Any]:
        return _converter.to_payload(self)


def prepare_curve(
    metric: MetricSpec, curve: InitialCurve, config: RunConfig
) -> tuple[InitialCurve, list[Violation]]:
    """Optional k1 projection, then validation and conformal resampling."""
    if config.curve.project_k1:
        curve = orthogonalize(metric, curve)
    violations = validate(metric, curve, config.tolerances.admissibility)
    for v in violations:
        logger.info(f"Initial data: {v}")
    if config.curve.conformalize:
        curve = conformalize(metric, curve)
    return curve, violations


def solve(
    metric: MetricSpec, curve: InitialCurve, config: RunConfig, **settings: Any
) -> SolutionSurface:
    run_settings = config.solver_settings(**settings)
    if config.backward:
        return solve_backward(metric, curve, config.target_time, run_settings)
    return continue_to_time(metric, curve, config.target_time, run_settings)


def reference_surface(config: RunConfig, s: SolutionSurface) -> SolutionSurface | None:
    """Closed-form comparison surface on the same lattice, forward runs only."""
    name = config.reference
    if name is None or s.time_orientation < 0:
        return None
    return analytic_oracle(
        name, s.n_nodes, s.n_rows, config.curve.oracle_params(config.metric.dimension)
    )


def _reached(s: SolutionSurface) -> float:
    y0 = s.y[-1, :, 0]
    return float(np.min(y0) if s.time_orientation > 0 else np.max(y0))


def _write_timing(directory: Path, started: float, s: SolutionSurface | None) -> Path:
    timing = {
        "wall_seconds": time.perf_counter() - started,
        "strips": 0 if s is None else len(s.strips),
        "rows": 0 if s is None else s.n_rows,
    }
    return write_json(timing, directory / TIMING_NAME)


def run(config: RunConfig, directory: str | Path | None = None) -> RunReport:
    """validate → conformalize → null_decompose → solve → diagnostics → export."""
    out = Path(directory or config.output.directory)
    started = time.perf_counter()
    direction = "backward" if config.backward else "forward"
    log_event(
        logger,
        SolverEvent(
            "run.started",
            SuccessStatus.SUCCESS,
            {"resolution": config.resolution, "target_time": config.target_time, "direction": direction},
        ),
    )
    metric = config.build_metric()
    surface: SolutionSurface | None = None
    summary: DiagnosticsSummary | None = None
    failure: BaseException | None = None
    violations: list[Violation] = []
    try:
        curve, violations = prepare_curve(metric, config.build_curve(), config)
        surface = solve(metric, curve, config)
        summary = summarize(
            metric,
            surface,
            conformal=config.curve.conformalize,
            t_target=config.target_time,
            reference=reference_surface(config, surface),
            tolerances=config.tolerances.diagnostics(),
        )
        status = summary.status
    except SolverFailure as e:
        logger.error(f"Solver failure: {e}")
        failure, surface, status = e, e.partial, SuccessStatus.SOLVER_FAILURE
    except ValidationError as e:
        logger.error(f"Validation failure: {e}")
        failure, status = e, SuccessStatus.INVARIANT_VIOLATION
        if isinstance(e, AdmissibilityError):
            violations = e.violations

    artifacts: dict[str, str] = {}
    if surface is not None and config.output.write_surface:
        name = f"surface.{config.output.surface_format}"
        if failure is not None:
            name = f"partial_{name}"
        write_surface(surface, out / name, config.output.surface_format)
        artifacts["surface"] = name
    if summary is not None:
        write_diagnostics(summary, out / DIAGNOSTICS_NAME)
        artifacts["diagnostics"] = DIAGNOSTICS_NAME
    artifacts["timing"] = TIMING_NAME

    report = RunReport(
        config=echo_config(config),
        status=status,
        direction=direction,
        target_time=config.target_time,
        rows=0 if surface is None else surface.n_rows,
        reached_time=None if surface is None else _reached(surface),
        reference=None if config.reference is None else str(config.reference),
        violations=tuple(str(v) for v in violations),
        strips=() if surface is None else surface.strips,
        diagnostics=None if summary is None else diagnostics_payload(summary),
        failure=failure,
        artifacts=artifacts,
    )
    write_json(report.payload(), out / REPORT_NAME)
    _write_timing(out, started, surface)
    log_event(
        logger,
        SolverEvent("run.finished", status, {"rows": report.rows, "artifacts": sorted(artifacts)}),
    )
    return report


def observed_orders(errors: Sequence[float]) -> list[float | str | None]:
    """
    log2 of successive error ratios; machine-precision errors are "exact".

    ```pycon
    >>> observed_orders([4e-3, 1e-3, 2.5e-4])
    [None, 2.0, 2.0]
    >>> observed_orders([1e-15, 2e-16])
    [None, 'exact']

    ```
    """
    orders: list[float | str | None] = [None]
    for coarse, fine in zip(errors[:-1], errors[1:]):
        if fine <= EXACT_ERROR and coarse <= EXACT_ERROR:
            orders.append("exact")
        elif fine <= 0.0:
            orders.append(math.inf)
        else:
            orders.append(round(math.log2(coarse / fine), 12))
    return orders


def _non_monotone(name: str, errors: Sequence[float]) -> list[str]:
    flags = []
    for i, (coarse, fine) in enumerate(zip(errors[:-1], errors[1:])):
        if fine >= coarse and not (fine <= EXACT_ERROR and coarse <= EXACT_ERROR):
            flags.append(f"{name}: error did not decrease from level {i} to {i + 1} ({coarse:.3e} -> {fine:.3e})")
    return flags


def richardson_difference(
    metric: MetricSpec, coarse: SolutionSurface, fine: SolutionSurface
) -> float:
    """Max flip-norm gap on the coarse lattice, fine surface sampled at (2k, 2j)."""
    rows = min(coarse.n_rows, (fine.n_rows + 1) // 2)
    y_fine = fine.y[: 2 * rows : 2, ::2]
    diff = coarse.y[:rows] - y_fine
    valid = coarse.valid[:rows] & fine.valid[: 2 * rows : 2, ::2]
    return float(np.max(np.where(valid, flip_norm_at(metric, coarse.y[:rows], diff), 0.0)))


def _study_artifacts(
    report_rows: Sequence[Mapping[str, Any]], out: Path
) -> dict[str, str]:
    write_table(report_rows, out / STUDY_TABLE_NAME)
    return {"table": STUDY_TABLE_NAME}


def _level_event(mode: StudyMode, details: Mapping[str, Any]) -> None:
    log_event(logger, SolverEvent("study.level", SuccessStatus.SUCCESS, {"mode": str(mode), **details}))


def convergence_study(
    config: RunConfig, levels: int | None = None, directory: str | Path | None = None
) -> StudyReport:
    """
    Solve at N, 2N, 4N, …; compare with the oracle when the curve has one,
    else with the next finer level. Reports observed orders per quantity.
    """
    levels = levels or config.study.levels
    if levels < 3:
        raise ContractViolation("convergence_study", f"needs at least 3 levels, got {levels}")
    out = Path(directory or config.output.directory)
    metric = config.build_metric()
    surfaces: list[SolutionSurface] = []
    for i in range(levels):
        n = config.resolution * 2**i
        curve, _ = prepare_curve(metric, config.build_curve(n), config)
        s = solve(metric, curve, config)
        surfaces.append(s)
        _level_event(StudyMode.CONVERGENCE, {"level": i, "nodes": n, "rows": s.n_rows})

    quantities: dict[str, list[float]] = {}
    if config.reference is not None:
        refs = [reference_surface(config, s) for s in surfaces]
        quantities["oracle_error"] = [
            oracle_error(metric, s, r) for s, r in zip(surfaces, refs) if r is not None
        ]
    else:
        quantities["self_difference"] = [
            richardson_difference(metric, c, f) for c, f in zip(surfaces[:-1], surfaces[1:])
        ]
    if config.curve.conformalize:
        quantities["null_drift"] = [null_drift(metric, s).max_drift for s in surfaces]

    table: list[dict[str, Any]] = []
    flags: list[str] = []
    for name, errors in quantities.items():
        flags.extend(_non_monotone(name, errors))
        for i, (err, order) in enumerate(zip(errors, observed_orders(errors))):
            s = surfaces[i]
            table.append(
                {
                    "quantity": name,
                    "level": i,
                    "nodes": s.n_nodes,
                    "h": s.h,
                    "rows": s.n_rows,
                    "error": err,
                    "order": "" if order is None else order,
                }
            )
    for f in flags:
        logger.warning(f)
    status = SuccessStatus.INVARIANT_VIOLATION if flags else SuccessStatus.SUCCESS
    report = StudyReport(
        StudyMode.CONVERGENCE,
        echo_config(config),
        status,
        tuple(table),
        tuple(flags),
        _study_artifacts(table, out),
    )
    write_json(report.payload(), out / STUDY_REPORT_NAME)
    return report


def stability_study(
    config: RunConfig,
    epsilons: Sequence[float] | None = None,
    directory: str | Path | None = None,
    ratio_tol: float = 0.1,
    rate_tol: float = 0.2,
) -> StudyReport:
    """
    Perturb k0 by ε·sin(m·x)·e_c for each ε, solve, and measure the energy of
    the difference from the unperturbed surface. E(0) must scale as ε² and the
    empirical growth rate must agree across ε.
    """
    eps = list(epsilons or config.study.epsilons)
    if len(eps) < 2:
        raise ContractViolation("stability_study", "needs at least two perturbation sizes")
    out = Path(directory or config.output.directory)
    metric = config.build_metric()
    raw = config.build_curve()
    base_curve, _ = prepare_curve(metric, raw, config)
    base = solve(metric, base_curve, config)

    table: list[dict[str, Any]] = []
    e0: list[float] = []
    rates: list[float] = []
    for e in eps:
        perturbed = raw.perturbed(e, config.study.component, config.study.mode_number)
        curve, _ = prepare_curve(metric, perturbed, config)
        rep = energy_stability(solve(metric, curve, config), base, config.tolerances.picard)
        e0.append(float(rep.energy[0]))
        rates.append(rep.k_emp)
        table.append({"epsilon": e, "energy0": float(rep.energy[0]), "rate": rep.rate, "k_emp": rep.k_emp})
        _level_event(StudyMode.STABILITY, {"epsilon": e, "k_emp": rep.k_emp})

    flags: list[str] = []
    for i in range(len(eps) - 1):
        expected = (eps[i] / eps[i + 1]) ** 2
        got = e0[i] / e0[i + 1] if e0[i + 1] > 0 else math.inf
        if abs(got / expected - 1.0) > ratio_tol:
            flags.append(f"E(0) ratio {got:.4g} for eps {eps[i]:g}/{eps[i + 1]:g}, expected {expected:.4g}")
    finite = [r for r in rates if math.isfinite(r)]
    if len(finite) == len(rates) and finite:
        scale = max(abs(r) for r in finite)
        spread = max(finite) - min(finite)
        if scale > 0 and spread > rate_tol * scale:
            flags.append(f"growth rate varies by {spread:.3g} across perturbations (max {scale:.3g})")
    else:
        flags.append("growth rate undefined for some perturbation")
    for f in flags:
        logger.warning(f)
    status = SuccessStatus.INVARIANT_VIOLATION if flags else SuccessStatus.SUCCESS
    report = StudyReport(
        StudyMode.STABILITY,
        echo_config(config),
        status,
        tuple(table),
        tuple(flags),
        _study_artifacts(table, out),
    )
    write_json(report.payload(), out / STUDY_REPORT_NAME)
    return report


def backward_study(config: RunConfig, directory: str | Path | None = None) -> StudyReport:
    """Forward run to +|T| and backward run to −|T| from the same data."""
    out = Path(directory or config.output.directory)
    horizon = abs(config.target_time)
    forward = run(attr.evolve(config, target_time=horizon, backward=False), out / "forward")
    backward = run(attr.evolve(config, target_time=-horizon, backward=True), out / "backward")
    table = [
        {
            "direction": r.direction,
            "target_time": r.target_time,
            "rows": r.rows,
            "reached_time": math.nan if r.reached_time is None else r.reached_time,
            "status": str(r.status),
        }
        for r in (forward, backward)
    ]
    status = SuccessStatus.worst(forward.status, backward.status)
    report = StudyReport(
        StudyMode.BACKWARD,
        echo_config(config),
        status,
        tuple(table),
        tuple(f"{r.direction}: {r.failure}" for r in (forward, backward) if r.failure is not None),
        _study_artifacts(table, out),
    )
    write_json(report.payload(), out / STUDY_REPORT_NAME)
    return report


def study(config: RunConfig, directory: str | Path | None = None) -> StudyReport | RunReport:
    """Dispatch on `study.mode`; a failure inside a study level is recorded, not raised."""
    mode = config.study.mode
    try:
        match mode:
            case StudyMode.SINGLE:
                return run(config, directory)
            case StudyMode.CONVERGENCE:
                return convergence_study(config, directory=directory)
            case StudyMode.STABILITY:
                return stability_study(config, directory=directory)
            case StudyMode.BACKWARD:
                return backward_study(config, directory)
    except SolverFailure as e:
        logger.error(f"Study aborted: {e}")
        status = SuccessStatus.SOLVER_FAILURE
        failure: BaseException = e
    except ValidationError as e:
        logger.error(f"Study aborted: {e}")
        status = SuccessStatus.INVARIANT_VIOLATION
        failure = e
    out = Path(directory or config.output.directory)
    report = StudyReport(mode, echo_config(config), status, (), (str(failure),), {})
    write_json(report.payload(), out / STUDY_REPORT_NAME)
    return report
