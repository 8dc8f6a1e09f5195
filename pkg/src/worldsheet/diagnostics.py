"""
Read-only analyses of a `SolutionSurface`.

Invariant checks return report objects; only `GeometryViolation` (area on a
Riemannian node) and `IncompleteSurfaceError` (slice not crossed) raise.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Callable, Sequence

import attr
import numpy as np

from ._types import FloatArray
from .char_solver import SolutionSurface, wave_map_residual
from .enums import CausalViolationKind, OracleName, SuccessStatus, WaveProfile
from .events import SolverEvent, log_event
from .exceptions import (
    CatalogError,
    ContractViolation,
    GeometryViolation,
    IncompleteSurfaceError,
)
from .initial_data import TWO_PI, InitialCurve
from .target_manifold import (
    MetricSpec,
    bounding_region,
    flip_norm_at,
    flip_norm_sq_at,
    inner_at,
    sample_bounds,
)

logger = logging.getLogger(__name__)

DEFAULT_CAUSAL_TOL = 1e-8
DEGENERATE_RATIO = 1e-8
DEFAULT_ENERGY_FLOOR = 1e-16


@attr.define(frozen=True, eq=False)
class NullDrift:
    max_uu: float
    max_vv: float
    row_uu: FloatArray
    row_vv: FloatArray
    eta_defect: float
    xi_defect: float

    @property
    def max_drift(self) -> float:
        return max(self.max_uu, self.max_vv)


def null_drift(metric: MetricSpec, s: SolutionSurface) -> NullDrift:
    """
    |⟨u,u⟩| and |⟨v,v⟩| per node, their row maxima, and how far ⟨u,u⟩ moves
    along η-lines (⟨v,v⟩ along ξ-lines) away from the initial row.
    """
    uu = inner_at(metric, s.y, s.u, s.u)
    vv = inner_at(metric, s.y, s.v, s.v)
    uu_abs = np.where(s.valid, np.abs(uu), 0.0)
    vv_abs = np.where(s.valid, np.abs(vv), 0.0)
    # node (k, j) lies on the η-line from (0, j+k) and the ξ-line from (0, j−k)
    k = np.arange(s.n_rows)[:, None]
    j = np.arange(s.n_nodes)[None, :]
    eta_src = uu[0][(j + k) % s.n_nodes]
    xi_src = vv[0][(j - k) % s.n_nodes]
    return NullDrift(
        max_uu=float(uu_abs.max()),
        max_vv=float(vv_abs.max()),
        row_uu=uu_abs.max(axis=1),
        row_vv=vv_abs.max(axis=1),
        eta_defect=float(np.max(np.where(s.valid, np.abs(uu - eta_src), 0.0))),
        xi_defect=float(np.max(np.where(s.valid, np.abs(vv - xi_src), 0.0))),
    )


def degenerate_mask(metric: MetricSpec, s: SolutionSurface, ratio: float = DEGENERATE_RATIO) -> np.ndarray:
    """Nodes where u and v (nearly) coincide, so ∂_x y vanishes."""
    diff = flip_norm_sq_at(metric, s.y, s.u - s.v)
    total = flip_norm_sq_at(metric, s.y, s.u + s.v)
    return s.valid & (diff < ratio * total)


@attr.define(frozen=True)
class CausalViolation:
    kind: CausalViolationKind
    row: int
    column: int
    value: float


def causal_check(
    metric: MetricSpec, s: SolutionSurface, tol: float = DEFAULT_CAUSAL_TOL
) -> list[CausalViolation]:
    """
    Per node: ∂_t y causal and future-directed, ∂_x y spacelike or lightlike.
    Degenerate nodes (∂_x y = 0) are lightlike and never violate.
    """
    yt = s.y_t
    yx = s.y_x
    tt = inner_at(metric, s.y, yt, yt)
    xx = inner_at(metric, s.y, yx, yx)
    degenerate = degenerate_mask(metric, s)
    checks = (
        (CausalViolationKind.NOT_CAUSAL, s.valid & (tt > tol), tt),
        (CausalViolationKind.WRONG_TIME_DIRECTION, s.valid & (yt[..., 0] <= 0.0), yt[..., 0]),
        (CausalViolationKind.NOT_SPACELIKE, s.valid & ~degenerate & (xx < -tol), xx),
    )
    found: list[CausalViolation] = []
    for kind, mask, values in checks:
        for row, column in np.argwhere(mask):
            found.append(CausalViolation(kind, int(row), int(column), float(values[row, column])))
    found.sort(key=lambda v: (v.row, v.column, str(v.kind)))
    return found


@attr.define(frozen=True, eq=False)
class ConformalFactor:
    lam: FloatArray
    offdiag: FloatArray
    trace_defect: FloatArray

    @property
    def min_lambda(self) -> float:
        return float(np.nanmin(self.lam))

    @property
    def max_offdiag(self) -> float:
        return float(np.nanmax(np.abs(self.offdiag)))

    @property
    def max_trace_defect(self) -> float:
        return float(np.nanmax(np.abs(self.trace_defect)))


def conformal_factor(metric: MetricSpec, s: SolutionSurface) -> ConformalFactor:
    """λ = ⟨∂_x y, ∂_x y⟩ with the off-diagonal and trace defects of y*g."""
    yt = s.y_t
    yx = s.y_x
    lam = inner_at(metric, s.y, yx, yx)
    tt = inner_at(metric, s.y, yt, yt)
    mask = np.where(s.valid, 1.0, np.nan)
    return ConformalFactor(
        lam=lam * mask,
        offdiag=inner_at(metric, s.y, yx, yt) * mask,
        trace_defect=(tt + lam) * mask,
    )


@attr.define(frozen=True)
class FunctionalValue:
    value: float
    degenerate_nodes: int


def _row_weights(s: SolutionSurface) -> FloatArray:
    """Trapezoid weights in t times h in x."""
    w = np.full(s.n_rows, s.h * s.h)
    if s.n_rows > 1:
        w[0] *= 0.5
        w[-1] *= 0.5
    else:
        w[:] = 0.0
    return w


def _pulled_back(metric: MetricSpec, s: SolutionSurface) -> tuple[FloatArray, FloatArray, FloatArray]:
    yt = s.y_t
    yx = s.y_x
    return (
        inner_at(metric, s.y, yt, yt),
        inner_at(metric, s.y, yt, yx),
        inner_at(metric, s.y, yx, yx),
    )


def area_functional(metric: MetricSpec, s: SolutionSurface, tol: float = DEFAULT_CAUSAL_TOL) -> FunctionalValue:
    """
    ∫ sqrt(−det y*g) over the surface. Degenerate nodes contribute 0; a
    positive determinant anywhere else is a geometry violation.
    """
    tt, tx, xx = _pulled_back(metric, s)
    det = tt * xx - tx * tx
    degenerate = degenerate_mask(metric, s)
    scale = np.maximum(np.abs(tt) * np.abs(xx), 1.0)
    bad = s.valid & ~degenerate & (det > tol * scale)
    if np.any(bad):
        raise GeometryViolation(
            [(int(r), int(c)) for r, c in np.argwhere(bad)], float(np.max(det[bad]))
        )
    density = np.where(s.valid & ~degenerate, np.sqrt(np.maximum(-det, 0.0)), 0.0)
    value = float(np.sum(density.sum(axis=1) * _row_weights(s)))
    return FunctionalValue(value, int(np.count_nonzero(degenerate)))


def energy_functional(metric: MetricSpec, s: SolutionSurface) -> FunctionalValue:
    """∫ ½(⟨y_x, y_x⟩ − ⟨y_t, y_t⟩); equals the area for conformal surfaces."""
    tt, _, xx = _pulled_back(metric, s)
    degenerate = degenerate_mask(metric, s)
    density = np.where(s.valid, 0.5 * (xx - tt), 0.0)
    value = float(np.sum(density.sum(axis=1) * _row_weights(s)))
    return FunctionalValue(value, int(np.count_nonzero(degenerate)))


@attr.define(frozen=True, eq=False)
class SliceGraph:
    T: float
    f: FloatArray
    lipschitz_defect: float


def time_slice_preimage(s: SolutionSurface, T: float) -> SliceGraph:
    """
    Worldsheet time f(x_j) at which column j crosses y⁰ = T, by linear
    interpolation between the bracketing rows.
    """
    order = np.argsort(s.t, kind="stable")
    t = s.t[order]
    y0 = s.y[order, :, 0]
    if np.any(y0[0] > T):
        raise IncompleteSurfaceError(T)
    f = np.empty(s.n_nodes)
    for j in range(s.n_nodes):
        column = y0[:, j]
        if not s.valid[order, j].all() or column[-1] < T:
            raise IncompleteSurfaceError(T, j)
        k = int(np.searchsorted(column, T, side="left"))
        if k == 0:
            f[j] = t[0]
            continue
        lo, hi = column[k - 1], column[k]
        frac = 0.0 if hi == lo else (T - lo) / (hi - lo)
        f[j] = t[k - 1] + frac * (t[k] - t[k - 1])
    slopes = np.abs(np.roll(f, -1) - f) / s.h
    return SliceGraph(T, f, float(max(np.max(slopes) - 1.0, 0.0)))


@attr.define(frozen=True, eq=False)
class StabilityReport:
    s: FloatArray
    energy: FloatArray
    rate: float
    k_emp: float
    bounded: bool
    floor: float


def energy_stability(
    s1: SolutionSurface,
    s2: SolutionSurface,
    tol: float = 1e-10,
    floor: float = DEFAULT_ENERGY_FLOOR,
) -> StabilityReport:
    """
    E(s) = Σ_x wᵀw·h with w = (V_x, V_t, V), V = y₁ − y₂, over the shared
    rows; fits log E to a line and reports K_emp = max log(E(s)/E(0))/s.
    """
    if (
        s1.n_nodes != s2.n_nodes
        or s1.dimension != s2.dimension
        or not math.isclose(s1.h, s2.h, rel_tol=1e-12)
        or s1.time_orientation != s2.time_orientation
        or not np.array_equal(s1.winding, s2.winding)
    ):
        raise ContractViolation("energy_stability", "surfaces do not share grid geometry")
    rows = min(s1.n_rows, s2.n_rows)
    if rows < 2:
        raise ContractViolation("energy_stability", "need at least two shared rows")
    V = s1.y[:rows] - s2.y[:rows]
    h = s1.h
    v_x = (np.roll(V, -1, axis=1) - np.roll(V, 1, axis=1)) / (2.0 * h)
    v_t = np.gradient(V, s1.dt, axis=0, edge_order=2 if rows >= 3 else 1)
    density = (v_x**2).sum(axis=-1) + (v_t**2).sum(axis=-1) + (V**2).sum(axis=-1)
    energy = density.sum(axis=1) * h
    times = np.abs(s1.t[:rows] - s1.t[0])

    positive = energy > 0.0
    rate = float(np.polyfit(times[positive], np.log(energy[positive]), 1)[0]) if positive.sum() >= 2 else 0.0
    if energy[0] > 0.0:
        growth = np.log(np.maximum(energy[1:], np.finfo(float).tiny) / energy[0]) / times[1:]
        k_emp = float(np.max(growth))
    else:
        k_emp = math.nan
    limit = max(floor, 100.0 * tol * tol * s1.n_nodes)
    return StabilityReport(times, energy, rate, k_emp, bool(np.all(energy <= limit)), limit)


# closed-form solutions: (y, y_t, y_x) as functions of (t, x) grids


def _embed(dimension: int, *components: FloatArray) -> FloatArray:
    if dimension < len(components):
        raise ContractViolation("analytic_oracle", f"needs dimension >= {len(components)}")
    out = np.zeros((*components[0].shape, dimension))
    for i, c in enumerate(components):
        out[..., i] = c
    return out


def _profile(profile: WaveProfile, amplitude: float) -> tuple[Callable[[FloatArray], tuple[FloatArray, FloatArray]], Callable[[FloatArray], tuple[FloatArray, FloatArray]]]:
    match profile:
        case WaveProfile.CIRCLE:
            return (
                lambda s: (amplitude * np.sin(s), amplitude * np.cos(s)),
                lambda s: (amplitude * np.cos(s), -amplitude * np.sin(s)),
            )
        case WaveProfile.FIGURE_EIGHT:
            return (
                lambda s: (amplitude * np.sin(s), amplitude * np.sin(s) * np.cos(s)),
                lambda s: (amplitude * np.cos(s), amplitude * np.cos(2.0 * s)),
            )


@attr.define(frozen=True)
class OracleParams:
    radius: float = 1.0
    beta: float = 0.0
    profile: WaveProfile = attr.field(default=WaveProfile.CIRCLE, converter=WaveProfile)
    amplitude: float = 0.5
    dimension: int = 3


def _oracle_fields(
    name: OracleName, t: FloatArray, x: FloatArray, p: OracleParams
) -> tuple[FloatArray, FloatArray, FloatArray]:
    n = p.dimension
    zeros = np.zeros_like(t)
    ones = np.ones_like(t)
    match name:
        case OracleName.MINKOWSKI_CIRCLE:
            r = p.radius
            y = _embed(n, t, r * np.cos(t) * np.sin(x), r * np.cos(t) * np.cos(x))
            yt = _embed(n, ones, -r * np.sin(t) * np.sin(x), -r * np.sin(t) * np.cos(x))
            yx = _embed(n, zeros, r * np.cos(t) * np.cos(x), -r * np.cos(t) * np.sin(x))
        case OracleName.FLAT_LINEAR:
            y = _embed(n, t, x, p.beta * t)
            yt = _embed(n, ones, zeros, p.beta * ones)
            yx = _embed(n, zeros, ones, zeros)
        case OracleName.FLAT_TRAVELLING_WAVE:
            value, slope = _profile(p.profile, p.amplitude)
            f1, f2 = value(x - t)
            d1, d2 = slope(x - t)
            y = _embed(n, t, f1, f2)
            yt = _embed(n, ones, -d1, -d2)
            yx = _embed(n, zeros, d1, d2)
    return y, yt, yx


def _oracle_name(name: OracleName | str) -> OracleName:
    try:
        return OracleName(name)
    except ValueError:
        raise CatalogError("oracle", name, [o.value for o in OracleName]) from None


def _oracle_winding(name: OracleName, p: OracleParams, period: float) -> FloatArray:
    w = np.zeros(p.dimension)
    if name is OracleName.FLAT_LINEAR:
        w[1] = period
    return w


def analytic_oracle(
    name: OracleName | str,
    n_nodes: int,
    n_rows: int,
    params: OracleParams | None = None,
) -> SolutionSurface:
    """
    Sample a closed-form solution on the lattice t_k = k·h, x_j = j·h with
    h = 2π/N, time in coordinate 0.

    ```pycon
    >>> s = analytic_oracle("minkowski-circle", 8, 2)
    >>> s.y[0, 0].tolist(), s.u[0, 0].tolist(), s.v[0, 0].tolist()
    ([0.0, 0.0, 1.0], [1.0, 1.0, 0.0], [1.0, -1.0, 0.0])

    ```
    """
    oracle = _oracle_name(name)
    p = params or OracleParams()
    if n_nodes < 1 or n_rows < 1:
        raise ContractViolation("analytic_oracle", "grid must have at least one row and one node")
    h = TWO_PI / n_nodes
    t, x = np.meshgrid(np.arange(n_rows) * h, np.arange(n_nodes) * h, indexing="ij")
    y, yt, yx = _oracle_fields(oracle, t, x, p)
    return SolutionSurface(
        period=TWO_PI,
        h=h,
        t=t[:, 0].copy(),
        y=y,
        u=yt + yx,
        v=yt - yx,
        valid=np.ones((n_rows, n_nodes), dtype=bool),
        winding=_oracle_winding(oracle, p, TWO_PI),
    )


def oracle_curve(name: OracleName | str, n_nodes: int, params: OracleParams | None = None) -> InitialCurve:
    """Initial data (k0, k1) = (y, ∂_t y) of an oracle at t = 0."""
    oracle = _oracle_name(name)
    p = params or OracleParams()
    x = np.arange(n_nodes) * TWO_PI / n_nodes
    y, yt, _ = _oracle_fields(oracle, np.zeros_like(x), x, p)
    return InitialCurve(y, yt, winding=_oracle_winding(oracle, p, TWO_PI))


def oracle_error(metric: MetricSpec, s: SolutionSurface, reference: SolutionSurface) -> float:
    """Max flip-norm distance of node positions over the shared rows."""
    rows = min(s.n_rows, reference.n_rows)
    if s.n_nodes != reference.n_nodes:
        raise ContractViolation("oracle_error", "node counts differ")
    diff = s.y[:rows] - reference.y[:rows]
    return float(np.max(np.where(s.valid[:rows], flip_norm_at(metric, s.y[:rows], diff), 0.0)))


@attr.define(frozen=True, eq=False)
class FlatDeviation:
    deviation: FloatArray
    bound: FloatArray

    @property
    def max_deviation(self) -> float:
        return float(self.deviation.max())

    @property
    def passed(self) -> bool:
        return bool(np.all(self.deviation <= self.bound + 1e-12))


def flat_deviation(
    metric: MetricSpec, s: SolutionSurface, n_samples: int = 16, safety: float = 1.5
) -> FlatDeviation:
    """
    Per row, how far u (v) has moved from its flat-target value, i.e. the
    first lattice row carried unchanged along η- (ξ-) lines, against the
    bound e^{G·V̄·t}·G·V̄·Ū·t with t measured from that row.
    """
    if s.n_rows < 2:
        return FlatDeviation(np.zeros(s.n_rows), np.zeros(s.n_rows))
    k = np.arange(s.n_rows)[:, None]
    j = np.arange(s.n_nodes)[None, :]
    u_flat = s.u[1][(j + k - 1) % s.n_nodes]
    v_flat = s.v[1][(j - k + 1) % s.n_nodes]
    dev = np.maximum(
        flip_norm_at(metric, s.y, s.u - u_flat), flip_norm_at(metric, s.y, s.v - v_flat)
    )
    dev = np.where(s.valid, dev, 0.0).max(axis=1)
    dev[0] = 0.0

    if metric.is_flat:
        g = 0.0
    else:
        g = sample_bounds(metric, bounding_region(s.y, s.h), n_samples, safety).christoffel_bound
    u_bar = float(np.max(flip_norm_at(metric, s.y, s.u)))
    v_bar = float(np.max(flip_norm_at(metric, s.y, s.v)))
    speed = max(u_bar, v_bar)
    t = np.abs(s.t - s.t[1])
    t[0] = 0.0
    bound = np.exp(g * speed * t) * g * u_bar * v_bar * t
    return FlatDeviation(dev, bound)


def degeneracy_profile(metric: MetricSpec, s: SolutionSurface) -> FloatArray:
    """Per-row minimum of flip_norm_sq(u − v); zero where the string collapses."""
    diff = flip_norm_sq_at(metric, s.y, s.u - s.v)
    return np.where(s.valid, diff, np.inf).min(axis=1)


def collapse_time(
    name: OracleName | str,
    t_lo: float,
    t_hi: float,
    params: OracleParams | None = None,
    n_nodes: int = 64,
    tol: float = 1e-10,
) -> float:
    """
    Bisect on the slope sign of min_x flip_norm_sq(u − v) along the oracle
    solution; the bracket must contain a single minimum.

    ```pycon
    >>> round(collapse_time("minkowski-circle", 0.0, 3.0), 8)
    1.57079633

    ```
    """
    oracle = _oracle_name(name)
    p = params or OracleParams()
    x = np.arange(n_nodes) * TWO_PI / n_nodes
    minkowski = MetricSpec.minkowski(p.dimension)

    def gap(t: float) -> float:
        tt = np.full_like(x, t)
        y, _, yx = _oracle_fields(oracle, tt, x, p)
        return float(np.min(flip_norm_sq_at(minkowski, y, 2.0 * yx)))

    lo, hi = t_lo, t_hi
    eps = max(tol, 1e-7)
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if gap(mid + eps) - gap(mid - eps) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@attr.define(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    passed: bool
    severity: SuccessStatus = SuccessStatus.INVARIANT_VIOLATION

    @property
    def status(self) -> SuccessStatus:
        return SuccessStatus.SUCCESS if self.passed else self.severity


@attr.define(frozen=True)
class DiagnosticTolerances:
    causal: float = DEFAULT_CAUSAL_TOL
    null_drift: float = 1e-5
    conformal: float = 1e-5
    oracle: float = 5e-4
    picard: float = 1e-10
    contraction: float = 0.9
    energy_floor: float = DEFAULT_ENERGY_FLOOR


@attr.define(frozen=True)
class DiagnosticsSummary:
    checks: tuple[Check, ...]
    area: float | None
    energy: float | None
    degenerate_nodes: int

    @property
    def status(self) -> SuccessStatus:
        return SuccessStatus.worst(*(c.status for c in self.checks))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def check(self, name: str) -> Check:
        return next(c for c in self.checks if c.name == name)


def _record(checks: list[Check], check: Check) -> None:
    checks.append(check)
    log_event(
        logger,
        SolverEvent(
            "diagnostic.check",
            check.status,
            {"name": check.name, "value": check.value, "threshold": check.threshold},
        ),
        logging.DEBUG,
    )


def summarize(
    metric: MetricSpec,
    s: SolutionSurface,
    *,
    conformal: bool,
    t_target: float | None = None,
    reference: SolutionSurface | None = None,
    tolerances: DiagnosticTolerances | None = None,
) -> DiagnosticsSummary:
    """Run every applicable check and collect named pass/fail results."""
    tol = tolerances or DiagnosticTolerances()
    checks: list[Check] = []

    drift = null_drift(metric, s)
    if conformal:
        _record(checks, Check("null_drift", drift.max_drift, tol.null_drift, drift.max_drift <= tol.null_drift))

    violations = causal_check(metric, s, tol.causal)
    _record(checks, Check("causal_violations", float(len(violations)), 0.0, not violations))

    cf = conformal_factor(metric, s)
    _record(checks, Check("min_conformal_factor", cf.min_lambda, -tol.causal, cf.min_lambda >= -tol.causal))
    if conformal:
        _record(checks, Check("conformal_offdiag", cf.max_offdiag, tol.conformal, cf.max_offdiag <= tol.conformal))
        _record(
            checks,
            Check("conformal_trace", cf.max_trace_defect, tol.conformal, cf.max_trace_defect <= tol.conformal),
        )

    area: float | None = None
    energy: float | None = None
    degenerate = int(np.count_nonzero(degenerate_mask(metric, s)))
    try:
        area_value = area_functional(metric, s, tol.causal)
        area = area_value.value
        _record(checks, Check("lorentzian_pullback", 0.0, 0.0, True))
    except GeometryViolation as e:
        logger.warning(str(e))
        _record(checks, Check("lorentzian_pullback", float(len(e.nodes)), 0.0, False))
    energy = energy_functional(metric, s).value
    if conformal and area is not None:
        gap = abs(energy - area)
        limit = tol.conformal * max(abs(area), 1.0)
        _record(checks, Check("energy_area_coincidence", gap, limit, gap <= limit, SuccessStatus.WARNING))

    if t_target is not None:
        try:
            graph = time_slice_preimage(s, t_target)
            _record(
                checks,
                Check("slice_lipschitz_defect", graph.lipschitz_defect, 2.0 * s.h, graph.lipschitz_defect <= 2.0 * s.h),
            )
        except IncompleteSurfaceError as e:
            logger.warning(str(e))
            _record(checks, Check("slice_lipschitz_defect", math.inf, 2.0 * s.h, False))

    residual = wave_map_residual(metric, s)
    res_max = float(np.nanmax(residual)) if np.any(np.isfinite(residual)) else 0.0
    if reference is not None:
        err = oracle_error(metric, s, reference)
        _record(checks, Check("oracle_error", err, tol.oracle, err <= tol.oracle))
        ref_res = wave_map_residual(metric, reference.truncated(min(s.n_rows, reference.n_rows)))
        ref_max = float(np.nanmax(ref_res)) if np.any(np.isfinite(ref_res)) else 0.0
        limit = max(10.0 * ref_max, 1e-10)
        _record(checks, Check("residual_vs_oracle", res_max, limit, res_max <= limit, SuccessStatus.WARNING))
    else:
        _record(checks, Check("wave_map_residual", res_max, math.inf, True))

    if s.strips:
        ratio = max(r.ratio for r in s.strips)
        _record(checks, Check("contraction_ratio", ratio, tol.contraction, ratio < tol.contraction))
        defect = max(r.symmetric_defect for r in s.strips)
        _record(checks, Check("symmetric_defect", defect, 10.0 * tol.picard, defect <= 10.0 * tol.picard))
        c0_ok = all(r.c0_within_bound for r in s.strips)
        c0 = max(r.c0_max / r.estimate.K_prime for r in s.strips)
        _record(checks, Check("c0_growth", c0, 1.0, c0_ok, SuccessStatus.WARNING))

    return DiagnosticsSummary(tuple(checks), area, energy, degenerate)


def row_sweep(s: SolutionSurface, count: int = 10) -> Sequence[float]:
    """`count` slice values strictly inside the range every column covers."""
    y0 = s.y[..., 0]
    lo = float(np.max(y0[0])) if s.time_orientation > 0 else float(np.max(y0[-1]))
    hi = float(np.min(y0[-1])) if s.time_orientation > 0 else float(np.min(y0[0]))
    return list(np.linspace(lo, hi, count + 2)[1:-1])


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
