"""
Characteristic null-lattice solver for the doubled first-order wave-map system.

Row k sits at worldsheet time t = k·h with nodes at x_j = j·h, h = P/N. Two
edge families enter every node (k, j):

- the ξ-edge U[k, j] from (k−1, j−1), carrying u = ∂y/∂ξ,
- the η-edge V[k, j] from (k−1, j+1), carrying v = ∂y/∂η.

A diamond has bottom (k−1, j), left (k, j−1), right (k, j+1) and top
(k+1, j); u is parallel-transported along η from its lower-right edge to its
upper-left edge, v along ξ from lower-left to upper-right, and the top node
is reached by integrating u along ξ (y) and v̂ along η (z).
"""

from __future__ import annotations

import logging
import math
from collections.abc import Sequence

import attr
import numpy as np

from ._types import AUTO_DELTA, AutoDeltaSentinel, FloatArray, Region
from .enums import SuccessStatus, ViolationKind
from .events import SolverEvent, log_event
from .exceptions import (
    BlowUpError,
    ContractViolation,
    DegenerateDataError,
    MonotonicityError,
    NonConvergenceError,
    SolverFailure,
    StepStarvationError,
    SurfaceStallError,
)
from .initial_data import (
    WAVE_MAP_HYPOTHESES,
    InitialCurve,
    NullData,
    null_decompose,
    require_admissible,
)
from .target_manifold import (
    ChartBounds,
    MetricSpec,
    bounding_region,
    christoffel,
    connection_term,
    flip_norm_at,
    inner_at,
    sample_bounds,
)

logger = logging.getLogger(__name__)

SQRT2 = math.sqrt(2.0)
MONOTONICITY_SLACK = 1e-10
DELTA_FACTOR = 5.0


def shifted(values: FloatArray, offset: int, winding: FloatArray | None = None) -> FloatArray:
    """
    out[j] = values[j + offset] on the closed string, adding the winding
    vector each time the index wraps past the end.

    ```pycon
    >>> import numpy as np
    >>> y = np.arange(4.0)[:, None]
    >>> shifted(y, 1, np.array([4.0]))[:, 0].tolist()
    [1.0, 2.0, 3.0, 4.0]
    >>> shifted(y, -1, np.array([4.0]))[:, 0].tolist()
    [-1.0, 0.0, 1.0, 2.0]

    ```
    """
    out = np.roll(values, -offset, axis=0)
    if winding is None or offset == 0 or not np.any(winding):
        return out
    n = values.shape[0]
    if offset > 0:
        out[n - offset :] += winding
    else:
        out[:-offset] -= winding
    return out


@attr.define(frozen=True, eq=False)
class LatticeFront:
    """The newest lattice row with the edges that enter it."""

    row: int
    h: float
    y: FloatArray
    u: FloatArray
    v: FloatArray
    winding: FloatArray

    @property
    def t(self) -> float:
        return self.row * self.h

    @property
    def n_nodes(self) -> int:
        return int(self.y.shape[0])


@attr.define(frozen=True)
class StepEstimate:
    injectivity_radius: float
    delta: float
    christoffel_bound: float
    u_bound: float
    v_bound: float
    h: float
    L: float
    l: float  # noqa: E741
    K: float
    K_prime: float
    n_rows: int

    @property
    def norm_sum(self) -> float:
        return self.u_bound + self.v_bound

    @property
    def height_ratio(self) -> float:
        """Admissible strip height l/√2 in units of h."""
        return self.l / SQRT2 / self.h

    @property
    def clamped(self) -> bool:
        return self.n_rows * self.h > self.l / SQRT2

    @classmethod
    def from_constants(
        cls,
        injectivity_radius: float,
        christoffel_bound: float,
        delta: float,
        u_bound: float,
        v_bound: float,
        h: float,
        row_time: float = 0.0,
    ) -> StepEstimate:
        """
        ```pycon
        >>> est = StepEstimate.from_constants(math.inf, 0.0, 1.0, 2.0, 2.0, 0.01)
        >>> est.L, est.l, est.K_prime, est.K, est.n_rows
        (0.2, 0.05, 16.0, 240.0, 3)

        ```
        """
        if not delta > 0:
            raise ContractViolation("strip_estimate", f"neighbourhood radius must be positive, got {delta}")
        norm_sum = u_bound + v_bound
        if norm_sum <= 0.0:
            raise DegenerateDataError(row_time)
        curvature = math.inf if christoffel_bound == 0.0 else 1.0 / (11.0 * christoffel_bound)
        big_l = min(injectivity_radius / 5.0, curvature, delta / 5.0)
        small_l = big_l / norm_sum
        n_rows = max(1, math.floor(small_l / (SQRT2 * h)))
        return cls(
            injectivity_radius=injectivity_radius,
            delta=delta,
            christoffel_bound=christoffel_bound,
            u_bound=u_bound,
            v_bound=v_bound,
            h=h,
            L=big_l,
            l=small_l,
            K=3.0 * norm_sum / small_l,
            K_prime=4.0 * norm_sum,
            n_rows=n_rows,
        )


@attr.define(frozen=True, eq=False)
class PicardState:
    """Last iterate of a strip with its convergence record."""

    iterations: int
    y: FloatArray
    z: FloatArray
    u: FloatArray
    uh: FloatArray
    v: FloatArray
    vh: FloatArray
    change: float
    ratios: tuple[float, ...]
    converged: bool

    @property
    def last_ratio(self) -> float:
        return self.ratios[-1] if self.ratios else 0.0

    def symmetric_defect(self, metric: MetricSpec) -> float:
        """max flip norm of y − z, u − û and v − v̂ over the new rows."""
        pts = self.y[1:]
        return max(
            float(np.max(flip_norm_at(metric, pts, self.y[1:] - self.z[1:]))),
            float(np.max(flip_norm_at(metric, pts, self.u[1:] - self.uh[1:]))),
            float(np.max(flip_norm_at(metric, pts, self.v[1:] - self.vh[1:]))),
        )


@attr.define(frozen=True, eq=False)
class StripSolution:
    """Collapsed rows base+1 … base+n_rows: node positions and entering edges."""

    base_row: int
    y: FloatArray
    u: FloatArray
    v: FloatArray

    @property
    def n_rows(self) -> int:
        return int(self.y.shape[0])

    def front(self, h: float, winding: FloatArray) -> LatticeFront:
        return LatticeFront(self.base_row + self.n_rows, h, self.y[-1], self.u[-1], self.v[-1], winding)


@attr.define(frozen=True)
class StripRecord:
    index: int
    base_row: int
    n_rows: int
    t_start: float
    estimate: StepEstimate
    iterations: int
    change: float
    ratio: float
    symmetric_defect: float
    c0_max: float
    starved: bool
    clamped: bool = False

    @property
    def c0_within_bound(self) -> bool:
        return self.c0_max <= self.estimate.K_prime


def _check_delta(_: object, __: attr.Attribute[object], value: float | AutoDeltaSentinel) -> None:
    if not isinstance(value, AutoDeltaSentinel) and not value > 0:
        raise ValueError(f"delta must be positive or AUTO, got {value}")


def _positive(_: object, attribute: attr.Attribute[float], value: float) -> None:
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value}")


@attr.define(frozen=True)
class SolverSettings:
    tol: float = attr.field(default=1e-10, validator=_positive)
    max_iter: int = attr.field(default=50, validator=_positive)
    delta: float | AutoDeltaSentinel = attr.field(default=AUTO_DELTA, validator=_check_delta)
    n_samples: int = attr.field(default=16, validator=_positive)
    safety: float = attr.field(default=1.5, validator=_positive)
    starvation_ratio: float = attr.field(default=0.5, validator=_positive)
    patience: int = attr.field(default=8, validator=_positive)
    max_rows: int = attr.field(default=100_000, validator=_positive)
    seed_perturbation: bool = False
    require_conformal: bool = True
    admissibility_tol: float = attr.field(default=1e-8, validator=_positive)

    def delta_for(self, h: float, norm_sum: float) -> float:
        if isinstance(self.delta, AutoDeltaSentinel):
            return DELTA_FACTOR * h * norm_sum
        return self.delta


@attr.define(frozen=True, eq=False)
class SolutionSurface:
    """
    Node-wise y, u, v on rows t_k. Row 0 is the initial data; for backward
    solves (`time_orientation == -1`) the rows run towards decreasing t.
    """

    period: float
    h: float
    t: FloatArray
    y: FloatArray
    u: FloatArray
    v: FloatArray
    valid: np.ndarray
    winding: FloatArray
    scale: float = 1.0
    time_orientation: int = 1
    strips: tuple[StripRecord, ...] = ()

    def __attrs_post_init__(self) -> None:
        rows, nodes, _ = self.y.shape
        if self.u.shape != self.y.shape or self.v.shape != self.y.shape:
            raise ValueError("y, u and v must share shape (rows, N, n)")
        if self.t.shape != (rows,) or self.valid.shape != (rows, nodes):
            raise ValueError("Row times and validity mask do not match the node arrays")

    @property
    def n_rows(self) -> int:
        return int(self.y.shape[0])

    @property
    def n_nodes(self) -> int:
        return int(self.y.shape[1])

    @property
    def dimension(self) -> int:
        return int(self.y.shape[2])

    @property
    def x(self) -> FloatArray:
        return np.arange(self.n_nodes) * self.h

    @property
    def dt(self) -> float:
        return self.h * self.time_orientation

    @property
    def y_t(self) -> FloatArray:
        return 0.5 * (self.u + self.v)

    @property
    def y_x(self) -> FloatArray:
        return 0.5 * (self.u - self.v)

    def truncated(self, n_rows: int) -> SolutionSurface:
        return attr.evolve(
            self,
            t=self.t[:n_rows],
            y=self.y[:n_rows],
            u=self.u[:n_rows],
            v=self.v[:n_rows],
            valid=self.valid[:n_rows],
        )

    def time_reflected(self) -> SolutionSurface:
        """Y(t, x) = R·y(−t, x) with R the reflection t ↦ −t of the target."""
        flip = np.ones(self.dimension)
        flip[0] = -1.0
        return attr.evolve(
            self,
            t=-self.t,
            y=self.y * flip,
            u=-self.v * flip,
            v=-self.u * flip,
            winding=self.winding * flip,
            time_orientation=-self.time_orientation,
        )


def transport_step(
    metric: MetricSpec,
    u_start: FloatArray,
    y_ends: tuple[FloatArray, FloatArray],
    v_ends: tuple[FloatArray, FloatArray],
    h: float,
    end_guess: FloatArray | None = None,
) -> FloatArray:
    """
    One midpoint step of ∂_η u = −Γ(y)(u, v) over parameter length h.

    The background (y, v) at the midpoint is the average of the two ends.
    Without `end_guess` the midpoint u comes from an Euler half step, which
    makes this the classic second-order predictor-corrector.
    """
    y_mid = 0.5 * (y_ends[0] + y_ends[1])
    v_mid = 0.5 * (v_ends[0] + v_ends[1])
    gam = christoffel(metric, y_mid)
    if end_guess is None:
        u_mid = u_start - 0.5 * h * connection_term(christoffel(metric, y_ends[0]), u_start, v_ends[0])
    else:
        u_mid = 0.5 * (u_start + end_guess)
    return u_start - h * connection_term(gam, u_mid, v_mid)


def start_lattice(
    metric: MetricSpec, curve: InitialCurve, nulls: NullData, null_edges: bool = True
) -> LatticeFront:
    """
    Row 1 from the initial data. Each edge value is u (v) transported half a
    step along η (ξ) from the node below its midpoint. The edges are then
    tied to the data by u − v = (k0[j+1] − k0[j−1])/h, so both integrations
    land on the same node. With `null_edges` the sum u + v is made orthogonal
    to that difference and of opposite square, which makes both edges null.
    """
    h = curve.h
    k0 = curve.k0
    w = curve.winding
    u_half = transport_step(metric, nulls.u, (k0, k0 + 0.5 * h * nulls.v), (nulls.v, nulls.v), 0.5 * h)
    v_half = transport_step(metric, nulls.v, (k0, k0 + 0.5 * h * nulls.u), (nulls.u, nulls.u), 0.5 * h)
    diff = (shifted(k0, 1, w) - shifted(k0, -1, w)) / h
    if null_edges:
        total = u_half + v_half
        pts = k0 + 0.25 * h * (nulls.u + nulls.v)
        dd = inner_at(metric, pts, diff, diff)
        if np.any(dd <= 0.0):
            raise BlowUpError(0.0, "node differences are not spacelike")
        total = total - (inner_at(metric, pts, total, diff) / dd)[:, None] * diff
        tt = inner_at(metric, pts, total, total)
        if np.any(tt >= 0.0):
            raise BlowUpError(0.0, "starting edges cannot be made null")
        total = total * np.sqrt(-dd / tt)[:, None]
    else:
        total = 2.0 * u_half - diff
    u1 = 0.5 * (total + diff)
    v1 = 0.5 * (total - diff)
    y1 = shifted(k0, -1, w) + h * u1
    if not (np.all(np.isfinite(u1)) and np.all(np.isfinite(y1))):
        raise BlowUpError(0.0, "non-finite starting row")
    return LatticeFront(1, h, y1, u1, v1, w)


def front_norms(metric: MetricSpec, front: LatticeFront) -> tuple[float, float]:
    """C¹ flip-norm bounds (u̲, v̲) of the edges entering the front row."""

    def _c1(w: FloatArray) -> float:
        value = np.max(flip_norm_at(metric, front.y, w))
        slope = np.max(flip_norm_at(metric, front.y, (np.roll(w, -1, axis=0) - w) / front.h))
        return float(max(value, slope))

    return _c1(front.u), _c1(front.v)


def strip_estimate(
    metric: MetricSpec, front: LatticeFront, bounds: ChartBounds, delta: float
) -> StepEstimate:
    """Strip constants from the front norms and the chart bounds sampled around the row."""
    if not bounds.contains(front.y):
        raise ContractViolation("strip_estimate", "front row leaves the sampled chart region")
    u_bound, v_bound = front_norms(metric, front)
    return StepEstimate.from_constants(
        bounds.injectivity_radius,
        bounds.christoffel_bound,
        delta,
        u_bound,
        v_bound,
        front.h,
        row_time=front.t,
    )


def _seed(front: LatticeFront, n_rows: int, perturb: bool) -> tuple[FloatArray, ...]:
    steps = np.arange(n_rows + 1)[:, None, None] * front.h
    y = front.y[None] + steps * 0.5 * (front.u + front.v)[None]
    u = np.repeat(front.u[None], n_rows + 1, axis=0)
    v = np.repeat(front.v[None], n_rows + 1, axis=0)
    if perturb:
        u[1:, :, 1] += 0.1
        v[1:, :, 1] += 0.1
    return y, y.copy(), u, u.copy(), v, v.copy()


def _sweep(
    metric: MetricSpec, front: LatticeFront, fields: Sequence[FloatArray]
) -> tuple[FloatArray, ...]:
    y, z, u, uh, v, vh = fields
    h = front.h
    w = front.winding
    yn, zn, un, uhn, vn, vhn = (np.empty_like(f) for f in fields)
    for new, old in zip((yn, zn, un, uhn, vn, vhn), fields, strict=True):
        new[0] = old[0]
    for i in range(y.shape[0] - 1):
        gam_y = christoffel(metric, 0.5 * (shifted(y[i], -1, w) + shifted(y[i], 1, w)))
        gam_z = christoffel(metric, 0.5 * (shifted(z[i], -1, w) + shifted(z[i], 1, w)))
        u_c = 0.5 * (np.roll(u[i], -1, axis=0) + u[i + 1])
        uh_c = 0.5 * (np.roll(uh[i], -1, axis=0) + uh[i + 1])
        v_c = 0.5 * (np.roll(v[i], 1, axis=0) + v[i + 1])
        vh_c = 0.5 * (np.roll(vh[i], 1, axis=0) + vh[i + 1])

        u_br = np.roll(un[i], -1, axis=0)
        uh_br = np.roll(uhn[i], -1, axis=0)
        v_bl = np.roll(vn[i], 1, axis=0)
        vh_bl = np.roll(vhn[i], 1, axis=0)
        un[i + 1] = u_br - h * connection_term(gam_z, 0.5 * (u_br + u[i + 1]), vh_c)
        uhn[i + 1] = uh_br - h * connection_term(gam_y, 0.5 * (uh_br + uh[i + 1]), v_c)
        vn[i + 1] = v_bl - h * connection_term(gam_z, 0.5 * (vh_bl + vh[i + 1]), u_c)
        vhn[i + 1] = vh_bl - h * connection_term(gam_y, 0.5 * (v_bl + v[i + 1]), uh_c)

        yn[i + 1] = shifted(yn[i], -1, w) + h * un[i + 1]
        zn[i + 1] = shifted(zn[i], 1, w) + h * vhn[i + 1]
    return yn, zn, un, uhn, vn, vhn


def picard_strip_solve(
    metric: MetricSpec,
    front: LatticeFront,
    est: StepEstimate,
    tol: float = 1e-10,
    max_iter: int = 50,
    seed_perturbation: bool = False,
) -> tuple[StripSolution, PicardState]:
    """
    Iterate the linearised transport system on `est.n_rows` rows above the
    front until the sup flip-norm change of all six fields drops below `tol`.
    The front itself never changes between iterates.
    """
    if not tol > 0:
        raise ContractViolation("picard_strip_solve", "tolerance must be positive")
    fields = _seed(front, est.n_rows, seed_perturbation)
    change = math.inf
    ratios: list[float] = []
    iterations = 0
    while iterations < max_iter:
        new = _sweep(metric, front, fields)
        iterations += 1
        if not all(np.all(np.isfinite(f)) for f in new):
            raise BlowUpError(front.t, f"non-finite transport output in sweep {iterations}")
        pts = new[0][1:]
        step = max(float(np.max(flip_norm_at(metric, pts, a[1:] - b[1:]))) for a, b in zip(new, fields, strict=True))
        if math.isfinite(change) and change > 0.0:
            ratios.append(step / change)
        change = step
        fields = new
        logger.debug(f"strip at t={front.t:.6g}: sweep {iterations} change {change:.3e}")
        if change <= tol:
            break
    state = PicardState(iterations, *fields, change=change, ratios=tuple(ratios), converged=change <= tol)
    if not state.converged:
        raise NonConvergenceError(front.t, iterations, change, state.last_ratio)
    y, z, u, uh, v, vh = fields
    solution = StripSolution(
        front.row,
        0.5 * (y[1:] + z[1:]),
        0.5 * (u[1:] + uh[1:]),
        0.5 * (v[1:] + vh[1:]),
    )
    return solution, state


def _check_monotone(rows: Sequence[FloatArray], first_new: int, winding: FloatArray) -> None:
    for k in range(max(first_new, 1), len(rows)):
        below = rows[k - 1]
        here = rows[k]
        for direction, prev in (
            ("column", below),
            ("xi-diagonal", shifted(below, -1, winding)),
            ("eta-diagonal", shifted(below, 1, winding)),
        ):
            rise = here[:, 0] - prev[:, 0]
            j = int(np.argmin(rise))
            if rise[j] < -MONOTONICITY_SLACK:
                raise MonotonicityError(k, j, float(-rise[j]), direction)


def _assemble(
    curve: InitialCurve,
    nulls: NullData,
    ys: Sequence[FloatArray],
    us: Sequence[FloatArray],
    vs: Sequence[FloatArray],
    n_rows: int,
    strips: Sequence[StripRecord],
) -> SolutionSurface:
    """Node values on rows 0 … n_rows−1; node u, v average the two edges straddling it."""
    n_rows = max(1, min(n_rows, len(us) - 1))
    u_rows = [nulls.u]
    v_rows = [nulls.v]
    for k in range(1, n_rows):
        u_rows.append(0.5 * (np.roll(us[k], -1, axis=0) + us[k + 1]))
        v_rows.append(0.5 * (np.roll(vs[k], 1, axis=0) + vs[k + 1]))
    y = np.stack(ys[:n_rows])
    return SolutionSurface(
        period=curve.period,
        h=curve.h,
        t=np.arange(n_rows) * curve.h,
        y=y,
        u=np.stack(u_rows),
        v=np.stack(v_rows),
        valid=np.all(np.isfinite(y), axis=-1),
        winding=curve.winding.copy(),
        scale=curve.scale,
        strips=tuple(strips),
    )


def _check_inputs(metric: MetricSpec, curve: InitialCurve, t_target: float, settings: SolverSettings) -> None:
    if curve.dimension != metric.dimension:
        raise ContractViolation("continue_to_time", "curve and metric dimensions differ")
    if np.any(curve.winding) and not metric.is_spatially_homogeneous:
        raise ContractViolation("continue_to_time", "wound strings need a spatially homogeneous metric")
    if not math.isfinite(t_target) or t_target <= float(np.max(curve.k0[:, 0])):
        raise ContractViolation(
            "continue_to_time",
            f"target time {t_target} must exceed the initial max y0 {float(np.max(curve.k0[:, 0])):.6g}",
        )
    if settings.require_conformal:
        require_admissible(metric, curve, ViolationKind, tol=settings.admissibility_tol)
    else:
        require_admissible(
            metric, curve, WAVE_MAP_HYPOTHESES, tol=settings.admissibility_tol, strict=False
        )


def continue_to_time(
    metric: MetricSpec,
    curve: InitialCurve,
    t_target: float,
    settings: SolverSettings | None = None,
) -> SolutionSurface:
    """
    March strips until every node of the newest reported row has y⁰ ≥ t_target.

    The surface ends at the first row that crosses the slice. A solver
    failure carries the rows computed so far in `.partial`.
    """
    settings = settings or SolverSettings()
    _check_inputs(metric, curve, t_target, settings)
    nulls = null_decompose(metric, curve)
    front = start_lattice(metric, curve, nulls, settings.require_conformal)
    ys: list[FloatArray] = [curve.k0, front.y]
    us: list[FloatArray] = [nulls.u, front.u]
    vs: list[FloatArray] = [nulls.v, front.v]
    strips: list[StripRecord] = []
    starved_run = 0
    region: Region = bounding_region(curve.k0, 0.0)

    try:
        _check_monotone(ys, 1, curve.winding)
        while float(np.min(ys[-2][:, 0])) < t_target:
            if len(ys) > settings.max_rows:
                raise SurfaceStallError(len(ys), float(np.min(ys[-2][:, 0])), t_target)
            delta = settings.delta_for(front.h, sum(front_norms(metric, front)))
            region = bounding_region(np.stack([ys[-2], front.y]), delta)
            bounds = sample_bounds(metric, region, settings.n_samples, settings.safety)
            est = strip_estimate(metric, front, bounds, delta)
            starved = est.height_ratio < settings.starvation_ratio
            if starved:
                starved_run += 1
                log_event(
                    logger,
                    SolverEvent(
                        "strip.starved",
                        SuccessStatus.WARNING,
                        {"t": front.t, "ratio": est.height_ratio, "run": starved_run},
                    ),
                    logging.WARNING,
                )
                if starved_run >= settings.patience:
                    raise StepStarvationError(front.t, est.height_ratio, region)
            else:
                starved_run = 0

            solution, state = picard_strip_solve(
                metric, front, est, settings.tol, settings.max_iter, settings.seed_perturbation
            )
            if not bounds.contains(solution.y):
                raise ContractViolation(
                    "continue_to_time", f"strip above t={front.t:.6g} left the sampled chart region"
                )
            first_new = len(ys)
            ys.extend(solution.y)
            us.extend(solution.u)
            vs.extend(solution.v)
            _check_monotone(ys, first_new, curve.winding)

            c0 = max(
                float(np.max(flip_norm_at(metric, solution.y, solution.u))),
                float(np.max(flip_norm_at(metric, solution.y, solution.v))),
            )
            record = StripRecord(
                index=len(strips),
                base_row=front.row,
                n_rows=solution.n_rows,
                t_start=front.t,
                estimate=est,
                iterations=state.iterations,
                change=state.change,
                ratio=state.last_ratio,
                symmetric_defect=state.symmetric_defect(metric),
                c0_max=c0,
                starved=starved,
                clamped=est.clamped,
            )
            strips.append(record)
            log_event(
                logger,
                SolverEvent(
                    "strip.solved",
                    SuccessStatus.SUCCESS if record.c0_within_bound else SuccessStatus.WARNING,
                    {
                        "index": record.index,
                        "rows": record.n_rows,
                        "iterations": record.iterations,
                        "ratio": record.ratio,
                        "symmetric_defect": record.symmetric_defect,
                        "L": est.L,
                        "l": est.l,
                        "clamped": record.clamped,
                    },
                ),
                logging.DEBUG,
            )
            front = solution.front(front.h, curve.winding)
    except SolverFailure as e:
        e.partial = _assemble(curve, nulls, ys, us, vs, len(ys) - 1, strips)
        raise

    reported = len(ys) - 1
    crossed = next(k for k in range(reported) if float(np.min(ys[k][:, 0])) >= t_target)
    surface = _assemble(curve, nulls, ys, us, vs, crossed + 1, strips)
    logger.info(
        f"Reached t_target={t_target:.6g} after {len(strips)} strips, {surface.n_rows} rows"
    )
    return surface


def solve_backward(
    metric: MetricSpec,
    curve: InitialCurve,
    t_target: float,
    settings: SolverSettings | None = None,
) -> SolutionSurface:
    """
    Solve towards t_target < min y⁰ by reflecting the data and the metric,
    solving forward, and reflecting the surface back.
    """
    lowest = float(np.min(curve.k0[:, 0]))
    if not math.isfinite(t_target) or t_target >= lowest:
        raise ContractViolation(
            "solve_backward", f"target time {t_target} must lie below the initial min y0 {lowest:.6g}"
        )
    mirrored = curve.time_reversed().time_reflected()
    try:
        forward = continue_to_time(metric.time_reflected(), mirrored, -t_target, settings)
    except SolverFailure as e:
        if e.partial is not None:
            e.partial = e.partial.time_reflected()
        raise
    return forward.time_reflected()


def wave_map_residual(metric: MetricSpec, surface: SolutionSurface) -> FloatArray:
    """
    Flip norm of y_tt − y_xx + Γ(y)(y_t, y_t) − Γ(y)(y_x, y_x) from central
    differences; rows without both neighbours are NaN.
    """
    out = np.full((surface.n_rows, surface.n_nodes), np.nan)
    if surface.n_rows < 3:
        return out
    y = surface.y
    h = surface.h
    dt = surface.dt
    w = surface.winding
    mid = y[1:-1]
    y_tt = (y[2:] - 2.0 * mid + y[:-2]) / (dt * dt)
    right = np.stack([shifted(row, 1, w) for row in mid])
    left = np.stack([shifted(row, -1, w) for row in mid])
    y_xx = (right - 2.0 * mid + left) / (h * h)
    y_t = (y[2:] - y[:-2]) / (2.0 * dt)
    y_x = (right - left) / (2.0 * h)
    gam = christoffel(metric, mid)
    residual = y_tt - y_xx + connection_term(gam, y_t, y_t) - connection_term(gam, y_x, y_x)
    interior = flip_norm_at(metric, mid, residual)
    valid = surface.valid[2:] & surface.valid[:-2] & surface.valid[1:-1]
    out[1:-1] = np.where(valid, interior, np.nan)
    return out


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
