"""
Product spacetimes M = ℝ × N with g = −dt² + g_ij dx^i dx^j.

Points are arrays whose last axis has length n (component 0 is the global time
function). Every evaluator accepts a single point or any stack of points and
broadcasts over the leading axes. Norms are measured in the flip metric
h = +dt² + g_ij dx^i dx^j.
"""

from __future__ import annotations

import itertools
import logging
import math
from functools import lru_cache

import attr
import numpy as np
from scipy import optimize
from scipy.stats import qmc

from ._types import (
    ArrayLike,
    ChristoffelFn,
    FloatArray,
    Region,
    SpatialMetricFn,
)
from .enums import MetricKind, ScaleFactorKind
from .exceptions import (
    ContractViolation,
    FactorizationError,
    MetricEvaluationError,
)

logger = logging.getLogger(__name__)

DEFAULT_FD_STEP = 1e-5
DEFAULT_SAFETY_FACTOR = 1.5
_N_SPHERE_DIRECTIONS = 96


def _as_float_array(value: ArrayLike) -> FloatArray:
    return np.asarray(value, dtype=np.float64)


@attr.define(frozen=True, eq=False)
class SpacetimePoint:
    """
    ```pycon
    >>> SpacetimePoint([0.0, 1.0, 2.0]).dimension
    3

    ```
    """

    coords: FloatArray = attr.field(converter=_as_float_array)

    @coords.validator
    def _check(self, _: attr.Attribute[FloatArray], value: FloatArray) -> None:
        if value.ndim != 1:
            raise ValueError(f"SpacetimePoint needs a vector, got shape {value.shape}")
        if not np.all(np.isfinite(value)):
            raise ValueError(f"SpacetimePoint has non-finite coordinates: {value}")

    @property
    def dimension(self) -> int:
        return int(self.coords.shape[0])

    @property
    def time(self) -> float:
        return float(self.coords[0])


@attr.define(frozen=True, eq=False)
class TangentVector:
    base: SpacetimePoint
    components: FloatArray = attr.field(converter=_as_float_array)

    @components.validator
    def _check(self, _: attr.Attribute[FloatArray], value: FloatArray) -> None:
        if value.shape != self.base.coords.shape:
            raise ValueError(
                f"TangentVector of shape {value.shape} cannot sit at a point of dimension {self.base.dimension}"
            )


@attr.define(frozen=True)
class ScaleFactor:
    """
    FLRW scale factor from the catalog.

    ```pycon
    >>> import numpy as np
    >>> sf = ScaleFactor(ScaleFactorKind.EXPONENTIAL, rate=1.0)
    >>> float(sf.a(np.log(2.0)) ** 2)
    4.0
    >>> sf.reflected().rate
    -1.0

    ```
    """

    kind: ScaleFactorKind = attr.field(converter=ScaleFactorKind)
    value: float = 1.0
    rate: float = 0.0
    epsilon: float = 0.0

    def a(self, t: ArrayLike) -> FloatArray:
        t = _as_float_array(t)
        match self.kind:
            case ScaleFactorKind.CONSTANT:
                return np.full_like(t, self.value)
            case ScaleFactorKind.EXPONENTIAL:
                return np.exp(self.rate * t)
            case ScaleFactorKind.POLYNOMIAL:
                return 1.0 + self.epsilon * t * t

    def a_dot(self, t: ArrayLike) -> FloatArray:
        t = _as_float_array(t)
        match self.kind:
            case ScaleFactorKind.CONSTANT:
                return np.zeros_like(t)
            case ScaleFactorKind.EXPONENTIAL:
                return self.rate * np.exp(self.rate * t)
            case ScaleFactorKind.POLYNOMIAL:
                return 2.0 * self.epsilon * t

    def reflected(self) -> ScaleFactor:
        """The scale factor of t ↦ −t."""
        if self.kind is ScaleFactorKind.EXPONENTIAL:
            return attr.evolve(self, rate=-self.rate)
        return self


def _reflect_points(points: FloatArray) -> FloatArray:
    out = points.copy()
    out[..., 0] = -out[..., 0]
    return out


@attr.define(frozen=True, eq=False)
class MetricSpec:
    """Immutable description of a product metric; share freely across threads."""

    dimension: int = attr.field()
    kind: MetricKind = attr.field(converter=MetricKind)
    scale_factor: ScaleFactor | None = None
    spatial_metric: SpatialMetricFn | None = None
    christoffel_fn: ChristoffelFn | None = None
    fd_step: float = DEFAULT_FD_STEP
    injectivity_radius: float = math.inf
    time_orientation: int = 1

    @dimension.validator
    def _check_dimension(self, _: attr.Attribute[int], value: int) -> None:
        if value < 2:
            raise ValueError(f"Spacetime dimension must be at least 2, got {value}")

    def __attrs_post_init__(self) -> None:
        if self.kind is MetricKind.FLRW and self.scale_factor is None:
            raise ValueError("FLRW metric needs a scale factor")
        if self.kind is MetricKind.USER and self.spatial_metric is None:
            raise ValueError("User metric needs a spatial metric function")
        if not self.injectivity_radius > 0:
            raise ValueError("Injectivity radius must be positive")
        if self.fd_step <= 0:
            raise ValueError("Finite-difference step must be positive")

    @classmethod
    def minkowski(cls, dimension: int) -> MetricSpec:
        return cls(dimension, MetricKind.MINKOWSKI)

    @classmethod
    def flrw(cls, dimension: int, scale_factor: ScaleFactor) -> MetricSpec:
        return cls(dimension, MetricKind.FLRW, scale_factor=scale_factor)

    @classmethod
    def user(
        cls,
        dimension: int,
        spatial_metric: SpatialMetricFn,
        christoffel_fn: ChristoffelFn | None = None,
        injectivity_radius: float = math.inf,
        fd_step: float = DEFAULT_FD_STEP,
    ) -> MetricSpec:
        return cls(
            dimension,
            MetricKind.USER,
            spatial_metric=spatial_metric,
            christoffel_fn=christoffel_fn,
            injectivity_radius=injectivity_radius,
            fd_step=fd_step,
        )

    @property
    def is_flat(self) -> bool:
        return self.kind is MetricKind.MINKOWSKI or (
            self.kind is MetricKind.FLRW
            and self.scale_factor is not None
            and self.scale_factor.kind is ScaleFactorKind.CONSTANT
        )

    @property
    def is_spatially_homogeneous(self) -> bool:
        """Spatial translations are isometries, so wound strings close up."""
        return self.kind in (MetricKind.MINKOWSKI, MetricKind.FLRW)

    def time_reflected(self) -> MetricSpec:
        """Pull the metric back along t ↦ −t."""
        flipped = -self.time_orientation
        match self.kind:
            case MetricKind.MINKOWSKI:
                return attr.evolve(self, time_orientation=flipped)
            case MetricKind.FLRW:
                assert self.scale_factor is not None
                return attr.evolve(
                    self,
                    scale_factor=self.scale_factor.reflected(),
                    time_orientation=flipped,
                )
            case MetricKind.USER:
                assert self.spatial_metric is not None
                g = self.spatial_metric
                gam = self.christoffel_fn
                return attr.evolve(
                    self,
                    spatial_metric=lambda pts: g(_reflect_points(pts)),
                    christoffel_fn=(
                        None if gam is None else _reflected_christoffel(gam, self.dimension)
                    ),
                    time_orientation=flipped,
                )



def _reflected_christoffel(gam: ChristoffelFn, n: int) -> ChristoffelFn:
    sign = np.ones(n)
    sign[0] = -1.0
    pattern = np.einsum("a,b,c->abc", sign, sign, sign)
    return lambda pts: pattern * gam(_reflect_points(pts))


def _points(p: SpacetimePoint | ArrayLike, n: int) -> FloatArray:
    pts = p.coords if isinstance(p, SpacetimePoint) else _as_float_array(p)
    if pts.shape[-1:] != (n,):
        raise ContractViolation(
            "metric evaluation", f"points of shape {pts.shape} in a {n}-dimensional chart"
        )
    return pts


def _first_bad(mask: np.ndarray, pts: FloatArray) -> FloatArray:
    """Coordinates of the first point flagged by `mask` (shape pts.shape[:-1])."""
    idx = np.argwhere(mask)
    return pts[tuple(idx[0])] if idx.size else pts.reshape(-1, pts.shape[-1])[0]


def spatial_block(m: MetricSpec, p: SpacetimePoint | ArrayLike) -> FloatArray:
    """g_ij at each point, shape (..., n-1, n-1)."""
    pts = _points(p, m.dimension)
    if not np.all(np.isfinite(pts)):
        raise MetricEvaluationError(_first_bad(~np.all(np.isfinite(pts), axis=-1), pts), "non-finite point")
    k = m.dimension - 1
    lead = pts.shape[:-1]
    match m.kind:
        case MetricKind.MINKOWSKI:
            return np.broadcast_to(np.eye(k), (*lead, k, k)).copy()
        case MetricKind.FLRW:
            assert m.scale_factor is not None
            a = m.scale_factor.a(pts[..., 0])
            if not np.all(np.isfinite(a)):
                raise MetricEvaluationError(_first_bad(~np.isfinite(a), pts))
            if np.any(a <= 0):
                raise FactorizationError(_first_bad(a <= 0, pts))
            return (a * a)[..., None, None] * np.eye(k)
        case MetricKind.USER:
            assert m.spatial_metric is not None
            g = _as_float_array(m.spatial_metric(pts))
            if g.shape != (*lead, k, k):
                raise ContractViolation(
                    "metric evaluation",
                    f"user metric returned shape {g.shape}, expected {(*lead, k, k)}",
                )
            finite = np.all(np.isfinite(g), axis=(-2, -1))
            if not np.all(finite):
                raise MetricEvaluationError(_first_bad(~finite, pts))
            try:
                _ = np.linalg.cholesky(g)
            except np.linalg.LinAlgError:
                lowest = np.linalg.eigvalsh(g)[..., 0]
                raise FactorizationError(_first_bad(lowest <= 0, pts)) from None
            return g


def metric_eval(m: MetricSpec, p: SpacetimePoint | ArrayLike) -> FloatArray:
    """
    g_{αβ} at each point.

    ```pycon
    >>> import numpy as np
    >>> m = MetricSpec.flrw(3, ScaleFactor(ScaleFactorKind.EXPONENTIAL, rate=1.0))
    >>> np.diag(metric_eval(m, [np.log(2.0), 0.3, -1.0])).round(12).tolist()
    [-1.0, 4.0, 4.0]

    ```
    """
    gs = spatial_block(m, p)
    lead = gs.shape[:-2]
    n = m.dimension
    g = np.zeros((*lead, n, n))
    g[..., 0, 0] = -1.0
    g[..., 1:, 1:] = gs
    return g


def flip_metric_eval(m: MetricSpec, p: SpacetimePoint | ArrayLike) -> FloatArray:
    h = metric_eval(m, p)
    h[..., 0, 0] = 1.0
    return h


def inner_at(
    m: MetricSpec, points: ArrayLike, a: ArrayLike, b: ArrayLike
) -> FloatArray:
    """g(a, b) for stacks of vectors based at stacks of points."""
    a = _as_float_array(a)
    b = _as_float_array(b)
    gs = spatial_block(m, points)
    spatial = np.einsum("...i,...ij,...j->...", a[..., 1:], gs, b[..., 1:])
    return -a[..., 0] * b[..., 0] + spatial


def flip_norm_sq_at(m: MetricSpec, points: ArrayLike, v: ArrayLike) -> FloatArray:
    """h(v, v) = g(v, v) + 2(v⁰)², clipped at zero against roundoff."""
    v = _as_float_array(v)
    return np.maximum(inner_at(m, points, v, v) + 2.0 * v[..., 0] * v[..., 0], 0.0)


def flip_norm_at(m: MetricSpec, points: ArrayLike, v: ArrayLike) -> FloatArray:
    return np.sqrt(flip_norm_sq_at(m, points, v))


def lorentz_inner(m: MetricSpec, v: TangentVector, w: TangentVector) -> float:
    """
    ```pycon
    >>> m = MetricSpec.minkowski(3)
    >>> p = SpacetimePoint([0.0, 0.0, 0.0])
    >>> lorentz_inner(m, TangentVector(p, [1, 1, 0]), TangentVector(p, [1, 1, 0]))
    0.0

    ```
    """
    if v.base is not w.base and not np.array_equal(v.base.coords, w.base.coords):
        raise ContractViolation("lorentz_inner", "vectors are based at different points")
    return float(inner_at(m, v.base.coords, v.components, w.components))


def flip_norm_sq(m: MetricSpec, v: TangentVector) -> float:
    return float(flip_norm_sq_at(m, v.base.coords, v.components))


def _flrw_christoffel(sf: ScaleFactor, pts: FloatArray, n: int) -> FloatArray:
    t = pts[..., 0]
    a = sf.a(t)
    ad = sf.a_dot(t)
    gam = np.zeros((*pts.shape[:-1], n, n, n))
    idx = np.arange(1, n)
    gam[..., 0, idx, idx] = (a * ad)[..., None]
    gam[..., idx, 0, idx] = (ad / a)[..., None]
    gam[..., idx, idx, 0] = (ad / a)[..., None]
    return gam


def christoffel_fd(
    m: MetricSpec, p: SpacetimePoint | ArrayLike, step: float | None = None
) -> FloatArray:
    """Levi-Civita symbols from central differences of `metric_eval`."""
    pts = _points(p, m.dimension)
    n = m.dimension
    eps = m.fd_step if step is None else step
    offsets = eps * np.eye(n)
    g_plus = metric_eval(m, pts[..., None, :] + offsets)
    g_minus = metric_eval(m, pts[..., None, :] - offsets)
    # dg[..., mu, a, b] = d_mu g_ab
    dg = (g_plus - g_minus) / (2.0 * eps)
    lowered = 0.5 * (
        np.swapaxes(dg, -3, -2) + np.einsum("...cdb->...dbc", dg) - dg
    )
    try:
        ginv = np.linalg.inv(metric_eval(m, pts))
    except np.linalg.LinAlgError:
        raise FactorizationError(pts.reshape(-1, n)[0]) from None
    gam = np.einsum("...ad,...dbc->...abc", ginv, lowered)
    return 0.5 * (gam + np.swapaxes(gam, -2, -1))


def christoffel(m: MetricSpec, p: SpacetimePoint | ArrayLike) -> FloatArray:
    """Γ^α_{βγ}, shape (..., n, n, n), symmetric in the lower indices."""
    pts = _points(p, m.dimension)
    n = m.dimension
    match m.kind:
        case MetricKind.MINKOWSKI:
            return np.zeros((*pts.shape[:-1], n, n, n))
        case MetricKind.FLRW:
            assert m.scale_factor is not None
            _ = spatial_block(m, pts)
            return _flrw_christoffel(m.scale_factor, pts, n)
        case MetricKind.USER:
            if m.christoffel_fn is None:
                return christoffel_fd(m, pts)
            gam = _as_float_array(m.christoffel_fn(pts))
            if not np.all(np.isfinite(gam)):
                raise MetricEvaluationError(pts.reshape(-1, n)[0], "non-finite Christoffel symbols")
            return 0.5 * (gam + np.swapaxes(gam, -2, -1))


def connection_term(
    gam: FloatArray, a: FloatArray, b: FloatArray
) -> FloatArray:
    """Γ(a, b)^α = Γ^α_{βγ} a^β b^γ."""
    return np.einsum("...abc,...b,...c->...a", gam, a, b)


@lru_cache(maxsize=8)
def _unit_directions(n: int) -> FloatArray:
    """Deterministic unit vectors: coordinate axes, diagonals, then a Halton cloud."""
    basis = np.eye(n)
    diagonals = np.array(
        [s for s in itertools.product((1.0, -1.0), repeat=n) if s[0] > 0]
    ) / math.sqrt(n)
    cloud = 2.0 * qmc.Halton(d=n, scramble=False).random(_N_SPHERE_DIRECTIONS + 1)[1:] - 1.0
    norms = np.linalg.norm(cloud, axis=1)
    cloud = cloud[norms > 1e-3] / norms[norms > 1e-3, None]
    return np.concatenate([basis, diagonals, cloud])


def orthonormal_christoffel(m: MetricSpec, pts: FloatArray) -> FloatArray:
    """Γ expressed in an h-orthonormal frame at each point."""
    gam = christoffel(m, pts)
    chol = np.linalg.cholesky(flip_metric_eval(m, pts))
    inv_t = np.swapaxes(np.linalg.inv(chol), -2, -1)
    return np.einsum("...ai,...abc,...bj,...ck->...ijk", chol, gam, inv_t, inv_t)


def _frame_norms(gt: FloatArray, directions: FloatArray) -> FloatArray:
    """max over directions e of the spectral norm of Σ e_i Γ̃^i."""
    mats = np.einsum("...ijk,di->...djk", gt, directions)
    return np.max(np.abs(np.linalg.eigvalsh(mats)), axis=(-2, -1))


def _basis_pair_norms(gt: FloatArray, chol: FloatArray) -> FloatArray:
    """max over coordinate basis pairs of ‖Γ(e_i, e_j)‖_h / (‖e_i‖_h ‖e_j‖_h)."""
    # columns of Lᵀ are the coordinate basis vectors in the orthonormal frame
    frame = np.swapaxes(chol, -2, -1)
    frame = frame / np.linalg.norm(frame, axis=-2, keepdims=True)
    pairs = np.einsum("...ijk,...ja,...kb->...abi", gt, frame, frame)
    return np.max(np.linalg.norm(pairs, axis=-1), axis=(-2, -1))


def christoffel_operator_norm(m: MetricSpec, p: SpacetimePoint | ArrayLike) -> float:
    """
    Operator norm of (v, w) ↦ Γ(v, w) in the flip metric at one point.

    Sampled over the unit sphere, then refined by Nelder-Mead from the best
    direction.

    ```pycon
    >>> m = MetricSpec.flrw(2, ScaleFactor(ScaleFactorKind.EXPONENTIAL, rate=1.0))
    >>> round(christoffel_operator_norm(m, [0.0, 0.0]), 6)
    1.154701

    ```
    """
    pts = _points(p, m.dimension)
    if pts.ndim != 1:
        raise ContractViolation("christoffel_operator_norm", "expects a single point")
    gt = orthonormal_christoffel(m, pts)
    if not np.any(gt):
        return 0.0
    chol = np.linalg.cholesky(flip_metric_eval(m, pts))
    dirs = _unit_directions(m.dimension)
    coarse = np.max(np.abs(np.linalg.eigvalsh(np.einsum("ijk,di->djk", gt, dirs))), axis=-1)
    best = int(np.argmax(coarse))

    def _neg_norm(e: FloatArray) -> float:
        length = float(np.linalg.norm(e))
        if length == 0.0:
            return 0.0
        mat = np.einsum("ijk,i->jk", gt, e / length)
        return -float(np.max(np.abs(np.linalg.eigvalsh(mat))))

    res = optimize.minimize(
        _neg_norm,
        dirs[best],
        method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000},
    )
    return max(float(coarse[best]), -float(res.fun), float(_basis_pair_norms(gt, chol)))


def _region_samples(region: Region, n_samples: int) -> FloatArray:
    lo, hi = region
    n = lo.shape[0]
    corners = np.array(list(itertools.product(*zip(lo, hi, strict=True))))
    if n > 4:
        corners = np.stack([lo, hi])
    unit = qmc.Halton(d=n, scramble=False).random(n_samples)
    return np.concatenate([corners, lo + unit * (hi - lo)])


@attr.define(frozen=True, eq=False)
class ChartBounds:
    """R and G(δ) for one region of the chart."""

    injectivity_radius: float
    christoffel_bound: float
    region: Region
    n_samples: int
    safety_factor: float = DEFAULT_SAFETY_FACTOR

    def contains(self, points: FloatArray, slack: float = 0.0) -> bool:
        lo, hi = self.region
        return bool(np.all(points >= lo - slack) and np.all(points <= hi + slack))


def sample_bounds(
    m: MetricSpec,
    region: Region,
    n_samples: int = 16,
    safety_factor: float = DEFAULT_SAFETY_FACTOR,
) -> ChartBounds:
    """
    G = safety × max of the sampled operator norm over the box corners and a
    Halton sequence. Nested sample sets give a monotone G.
    """
    lo, hi = (_as_float_array(c) for c in region)
    if lo.shape != (m.dimension,) or hi.shape != (m.dimension,):
        raise ContractViolation("sample_bounds", "region corners must match the chart dimension")
    if np.any(hi <= lo):
        raise ContractViolation("sample_bounds", "region is degenerate")
    if n_samples < 1:
        raise ContractViolation("sample_bounds", "need at least one sample")

    if m.kind is MetricKind.MINKOWSKI:
        g_bound = 0.0
    else:
        pts = _region_samples((lo, hi), n_samples)
        gt = orthonormal_christoffel(m, pts)
        chol = np.linalg.cholesky(flip_metric_eval(m, pts))
        norms = np.maximum(
            _frame_norms(gt, _unit_directions(m.dimension)), _basis_pair_norms(gt, chol)
        )
        g_bound = safety_factor * float(np.max(norms))

    radius = m.injectivity_radius if m.kind is MetricKind.USER else math.inf
    return ChartBounds(radius, g_bound, (lo, hi), n_samples, safety_factor)


def bounding_region(points: FloatArray, margin: float) -> Region:
    """Axis-aligned box around a point cloud, widened by `margin` on every side."""
    flat = points.reshape(-1, points.shape[-1])
    return flat.min(axis=0) - margin, flat.max(axis=0) + margin


