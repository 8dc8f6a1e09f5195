"""
Closed initial curves k = (k0, k1) sampled on a periodic grid.

The sampled arrays have shape (N, n): node j sits at x_j = j·P/N. A curve may
wind around a periodic spatial direction, k0(x + P) = k0(x) + W; derivatives
and interpolation act on the periodic part k0(x) − W·x/P.
"""

from __future__ import annotations

import logging
import math
from collections.abc import Iterable, Sequence
from pathlib import Path

import attr
import numpy as np
from scipy.spatial import KDTree

from ._types import ArrayLike, FloatArray, StrPath
from .enums import DerivativeScheme, Provenance, ViolationKind
from .exceptions import (
    AdmissibilityError,
    ContractViolation,
    RefinementError,
    SolverFailure,
    SurfaceFormatError,
)
from .target_manifold import MetricSpec, flip_metric_eval, flip_norm_at, flip_norm_sq_at, inner_at

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi
DEFAULT_TOL = 1e-8
DEFAULT_REFINE = 16
ALIAS_THRESHOLD = 1e-6
IMAGE_SAMPLES = 2048
IMAGE_NEWTON_STEPS = 4

WAVE_MAP_HYPOTHESES = frozenset(
    {
        ViolationKind.NOT_SPACELIKE,
        ViolationKind.NOT_TIMELIKE,
        ViolationKind.DEGENERATE,
        ViolationKind.PAST_DIRECTED,
    }
)


def is_power_of_two(n: int) -> bool:
    """
    ```pycon
    >>> [is_power_of_two(k) for k in (1, 16, 100, 256)]
    [True, True, False, True]

    ```
    """
    return n > 0 and n & (n - 1) == 0


def _matrix(value: ArrayLike) -> FloatArray:
    return np.array(value, dtype=np.float64)


def spectral_derivative(values: FloatArray, period: float) -> FloatArray:
    """d/dx of periodic samples along axis 0 (Nyquist mode dropped)."""
    n = values.shape[0]
    coeffs = np.fft.rfft(values, axis=0)
    k = np.fft.rfftfreq(n, d=1.0 / n) * (TWO_PI / period)
    k[-1] = 0.0 if n % 2 == 0 else k[-1]
    shape = (-1,) + (1,) * (values.ndim - 1)
    return np.fft.irfft(1j * k.reshape(shape) * coeffs, n=n, axis=0)


def fd4_derivative(values: FloatArray, h: float) -> FloatArray:
    """Fourth-order central differences with wraparound."""
    return (
        -np.roll(values, -2, axis=0)
        + 8.0 * np.roll(values, -1, axis=0)
        - 8.0 * np.roll(values, 1, axis=0)
        + np.roll(values, 2, axis=0)
    ) / (12.0 * h)


def fourier_eval(values: FloatArray, period: float, s: ArrayLike) -> FloatArray:
    """
    Trigonometric interpolant of periodic samples evaluated at arbitrary s.

    ```pycon
    >>> import numpy as np
    >>> x = np.arange(8) * 2 * np.pi / 8
    >>> float(fourier_eval(np.sin(x), 2 * np.pi, [0.3])[0].round(12))
    0.295520206661

    ```
    """
    n = values.shape[0]
    s = np.atleast_1d(np.asarray(s, dtype=np.float64))
    coeffs = np.fft.rfft(values, axis=0) / n
    weights = np.full(coeffs.shape[0], 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    k = np.arange(coeffs.shape[0])
    phases = np.exp(1j * np.outer(s * (TWO_PI / period), k)) * weights
    return np.einsum("mk,k...->m...", phases, coeffs).real


def _winding_default(self: InitialCurve) -> FloatArray:
    return np.zeros(self.k0.shape[1])


@attr.define(frozen=True, eq=False)
class InitialCurve:
    k0: FloatArray = attr.field(converter=_matrix)
    k1: FloatArray = attr.field(converter=_matrix)
    period: float = TWO_PI
    provenance: Provenance = attr.field(default=Provenance.RAW, converter=Provenance)
    winding: FloatArray = attr.field(
        default=attr.Factory(_winding_default, takes_self=True), converter=_matrix
    )
    scale: float = 1.0
    scheme: DerivativeScheme = attr.field(
        default=DerivativeScheme.SPECTRAL, converter=DerivativeScheme
    )

    def __attrs_post_init__(self) -> None:
        if self.k0.ndim != 2 or self.k0.shape != self.k1.shape:
            raise ValueError(
                f"k0 and k1 must be (N, n) arrays of equal shape, got {self.k0.shape} and {self.k1.shape}"
            )
        if not is_power_of_two(self.n_nodes) or self.n_nodes < 8:
            raise ValueError(f"Node count must be a power of two >= 8, got {self.n_nodes}")
        if self.dimension < 2:
            raise ValueError("Curves live in spacetimes of dimension >= 2")
        if self.winding.shape != (self.dimension,):
            raise ValueError(f"Winding vector must have length {self.dimension}")
        if not (np.all(np.isfinite(self.k0)) and np.all(np.isfinite(self.k1))):
            raise ValueError("Curve samples must be finite")
        if not self.period > 0:
            raise ValueError("Period must be positive")

    @property
    def n_nodes(self) -> int:
        return int(self.k0.shape[0])

    @property
    def dimension(self) -> int:
        return int(self.k0.shape[1])

    @property
    def h(self) -> float:
        return self.period / self.n_nodes

    @property
    def x(self) -> FloatArray:
        return np.arange(self.n_nodes) * self.h

    @property
    def raw_period(self) -> float:
        """Worldsheet period before normalisation back to `period`."""
        return self.period * self.scale

    def periodic_part(self) -> FloatArray:
        return self.k0 - np.outer(self.x, self.winding) / self.period

    def derivative(self, values: FloatArray) -> FloatArray:
        if self.scheme is DerivativeScheme.FD4:
            return fd4_derivative(values, self.h)
        return spectral_derivative(values, self.period)

    def tangent(self) -> FloatArray:
        """k0′ at the nodes."""
        return self.derivative(self.periodic_part()) + self.winding / self.period

    def evaluate(self, s: ArrayLike) -> tuple[FloatArray, FloatArray]:
        """(k0, k1) at arbitrary parameters by trigonometric interpolation."""
        s = np.atleast_1d(np.asarray(s, dtype=np.float64))
        k0 = fourier_eval(self.periodic_part(), self.period, s) + np.outer(
            s, self.winding
        ) / self.period
        return k0, fourier_eval(self.k1, self.period, s)

    def resampled(self, n_nodes: int) -> InitialCurve:
        """Trigonometric resampling onto `n_nodes` uniform nodes."""
        k0, k1 = self.evaluate(np.arange(n_nodes) * self.period / n_nodes)
        return attr.evolve(self, k0=k0, k1=k1)

    def time_reversed(self) -> InitialCurve:
        """Negate the velocity field k1."""
        return attr.evolve(self, k1=-self.k1)

    def time_reflected(self) -> InitialCurve:
        """Image under the isometry t ↦ −t of the product chart."""
        flip = np.ones(self.dimension)
        flip[0] = -1.0
        return attr.evolve(
            self, k0=self.k0 * flip, k1=self.k1 * flip, winding=self.winding * flip
        )

    def perturbed(self, amplitude: float, component: int = 1, mode: int = 1) -> InitialCurve:
        """k0 + amplitude·sin(mode·x)·e_component; drops the conformal tag."""
        if not 0 <= component < self.dimension:
            raise ContractViolation("perturbed", f"no component {component}")
        k0 = self.k0.copy()
        k0[:, component] += amplitude * np.sin(mode * self.x * TWO_PI / self.period)
        return attr.evolve(self, k0=k0, provenance=Provenance.RAW)


@attr.define(frozen=True)
class Violation:
    kind: ViolationKind
    node: int
    magnitude: float

    @property
    def message(self) -> str:
        match self.kind:
            case ViolationKind.NOT_SPACELIKE:
                return f"k0' not spacelike at node {self.node} (<k0',k0'>={-self.magnitude:.3g})"
            case ViolationKind.NOT_TIMELIKE:
                return f"k1 not timelike at node {self.node} (<k1,k1>={self.magnitude:.3g})"
            case ViolationKind.DEGENERATE:
                return f"k1 ± k0' vanishes at node {self.node} (flip norm² {self.magnitude:.3g})"
            case ViolationKind.NOT_ORTHOGONAL:
                return f"k0' not orthogonal to k1 at node {self.node} (|<k0',k1>|={self.magnitude:.3g})"
            case ViolationKind.NORM_MISMATCH:
                return (
                    f"norm condition <k0',k0'> != -<k1,k1> at node {self.node} "
                    + f"(defect {self.magnitude:.3g})"
                )
            case ViolationKind.PAST_DIRECTED:
                return f"k1 not future-directed at node {self.node} (k1^0={-self.magnitude:.3g})"

    def __str__(self) -> str:
        return self.message


@attr.define(frozen=True, eq=False)
class NullData:
    """Characteristic derivatives on the base circle."""

    base: FloatArray
    u: FloatArray
    v: FloatArray
    u_bound: float
    v_bound: float

    @property
    def norm_sum(self) -> float:
        return self.u_bound + self.v_bound


def validate(
    metric: MetricSpec,
    curve: InitialCurve,
    tol: float = DEFAULT_TOL,
    strict: bool = True,
) -> list[Violation]:
    """
    Every violated hypothesis with its worst node. Empty iff the data are
    admissible for a conformal solve.

    `strict=False` accepts weakly spacelike/timelike data, as plain wave-map
    runs do. Tolerances are relative to the largest flip norm² of k0′ and k1.
    """
    if curve.dimension != metric.dimension:
        raise ContractViolation("validate", "curve and metric dimensions differ")
    ds = curve.tangent()
    pts = curve.k0
    ip_ss = inner_at(metric, pts, ds, ds)
    ip_11 = inner_at(metric, pts, curve.k1, curve.k1)
    ip_s1 = inner_at(metric, pts, ds, curve.k1)
    scale = float(
        max(np.max(flip_norm_sq_at(metric, pts, ds)), np.max(flip_norm_sq_at(metric, pts, curve.k1)))
    )
    thresh = tol * max(scale, np.finfo(float).tiny)
    nondeg = np.minimum(
        flip_norm_sq_at(metric, pts, curve.k1 + ds), flip_norm_sq_at(metric, pts, curve.k1 - ds)
    )
    weak = 0.0 if strict else thresh
    checks: list[tuple[ViolationKind, np.ndarray, FloatArray, FloatArray]] = [
        # kind, violated mask, ranking (larger is worse), reported magnitude
        (ViolationKind.NOT_SPACELIKE, (ip_ss <= 0.0) if strict else (ip_ss < -weak), -ip_ss, -ip_ss),
        (ViolationKind.NOT_TIMELIKE, (ip_11 >= 0.0) if strict else (ip_11 > weak), ip_11, ip_11),
        (ViolationKind.DEGENERATE, nondeg <= thresh, -nondeg, nondeg),
        (ViolationKind.PAST_DIRECTED, curve.k1[:, 0] <= 0.0, -curve.k1[:, 0], -curve.k1[:, 0]),
        (ViolationKind.NOT_ORTHOGONAL, np.abs(ip_s1) > thresh, np.abs(ip_s1), np.abs(ip_s1)),
        (
            ViolationKind.NORM_MISMATCH,
            np.abs(ip_ss + ip_11) > thresh,
            np.abs(ip_ss + ip_11),
            np.abs(ip_ss + ip_11),
        ),
    ]
    found: list[Violation] = []
    for kind, mask, rank, magnitude in checks:
        if np.any(mask):
            j = int(np.argmax(np.where(mask, rank, -np.inf)))
            found.append(Violation(kind, j, float(magnitude[j])))
    return found


def require_admissible(
    metric: MetricSpec,
    curve: InitialCurve,
    kinds: Iterable[ViolationKind],
    tol: float = DEFAULT_TOL,
    strict: bool = True,
) -> None:
    wanted = set(kinds)
    bad = [v for v in validate(metric, curve, tol, strict) if v.kind in wanted]
    if bad:
        raise AdmissibilityError(bad)


def orthogonalize(metric: MetricSpec, curve: InitialCurve) -> InitialCurve:
    """Gram-Schmidt preprocessing: remove the k0′ component of k1."""
    ds = curve.tangent()
    coef = inner_at(metric, curve.k0, curve.k1, ds) / inner_at(metric, curve.k0, ds, ds)
    logger.info(f"Projected k1 against k0' (max coefficient {float(np.max(np.abs(coef))):.3e})")
    return attr.evolve(curve, k1=curve.k1 - coef[:, None] * ds, provenance=Provenance.RAW)


def _speed_ratio(metric: MetricSpec, curve: InitialCurve) -> FloatArray:
    ds = curve.tangent()
    ip_ss = inner_at(metric, curve.k0, ds, ds)
    ip_11 = inner_at(metric, curve.k0, curve.k1, curve.k1)
    return np.sqrt(-ip_11) / np.sqrt(ip_ss)


def _rk4_reparametrization(
    ratio: FloatArray, period: float, steps: int, step: float
) -> FloatArray:
    """Integrate φ′ = ρ(φ), φ(0) = 0, with ρ the trigonometric interpolant."""

    def rho(s: float) -> float:
        return float(fourier_eval(ratio, period, s)[0])

    phi = np.empty(steps + 1)
    phi[0] = 0.0
    for i in range(steps):
        p = phi[i]
        a = rho(p)
        b = rho(p + 0.5 * step * a)
        c = rho(p + 0.5 * step * b)
        d = rho(p + step * c)
        phi[i + 1] = p + step * (a + 2.0 * b + 2.0 * c + d) / 6.0
    return phi


def _top_band_ratio(samples: FloatArray) -> float:
    coeffs = np.fft.rfft(samples - samples.mean(axis=0), axis=0)
    energy = np.sum(np.abs(coeffs) ** 2, axis=tuple(range(1, coeffs.ndim)))
    n = samples.shape[0]
    # a unit-amplitude mode carries energy ~N²; roundoff on flat data stays far below
    total = max(float(energy[1:].sum()), float(n * n))
    return float(energy[3 * n // 8 + 1 :].sum()) / total


def conformalize(
    metric: MetricSpec, curve: InitialCurve, refine: int = DEFAULT_REFINE
) -> InitialCurve:
    """
    Reparametrize so that ⟨k0′, k0′⟩ = −⟨k1, k1⟩ pointwise, then normalise the
    worldsheet period back to `curve.period`, scaling k1 with it.
    """
    require_admissible(
        metric,
        curve,
        {
            ViolationKind.NOT_SPACELIKE,
            ViolationKind.NOT_TIMELIKE,
            ViolationKind.DEGENERATE,
            ViolationKind.NOT_ORTHOGONAL,
        },
    )
    n = curve.n_nodes
    period = curve.period
    ratio = _speed_ratio(metric, curve)

    # the new period is ∫ ds / ρ(s); the trapezoid rule is spectrally exact here
    fine = np.arange(refine * n) * (period / (refine * n))
    new_period = float(np.mean(1.0 / fourier_eval(ratio, period, fine))) * period

    steps = refine * n
    phi = _rk4_reparametrization(ratio, period, steps, new_period / steps)
    if not np.all(np.diff(phi) > 0):
        raise SolverFailure("Reparametrization is not monotone")
    phi *= period / phi[-1]
    nodes = phi[:-1:refine]

    k0, k1 = curve.evaluate(nodes)
    stretch = new_period / period
    out = attr.evolve(
        curve,
        k0=k0,
        k1=stretch * k1,
        provenance=Provenance.CONFORMALIZED,
        scale=curve.scale * stretch,
    )
    alias = max(_top_band_ratio(out.periodic_part()), _top_band_ratio(out.k1))
    if alias > ALIAS_THRESHOLD:
        raise RefinementError(n, alias)
    logger.info(
        f"Conformalized curve: raw period {new_period:.6g}, scale {out.scale:.6g}, "
        + f"top-band energy {alias:.2e}"
    )
    return out


def _bilinear(g: FloatArray, a: FloatArray, b: FloatArray) -> FloatArray:
    return np.einsum("mi,ij,mj->m", a, g, b)


def _directed_image_distance(
    src: InitialCurve, dst: InitialCurve, chol: FloatArray, samples: int
) -> float:
    """Largest distance from a dense sample of src's image to dst's image."""
    pts, _ = src.evaluate(np.arange(samples) * src.period / samples)
    grid = np.arange(samples) * dst.period / samples
    coarse, _ = dst.evaluate(grid)
    _, nearest = KDTree(coarse @ chol).query(pts @ chol)
    s = grid[nearest]

    # Newton on d/ds |dst(s) − p|² = 0 from the nearest grid sample
    g = chol @ chol.T
    d1 = spectral_derivative(dst.periodic_part(), dst.period)
    d2 = spectral_derivative(d1, dst.period)
    for _ in range(IMAGE_NEWTON_STEPS):
        at, _ = dst.evaluate(s)
        a1 = fourier_eval(d1, dst.period, s) + dst.winding / dst.period
        a2 = fourier_eval(d2, dst.period, s)
        diff = at - pts
        slope = _bilinear(g, diff, a1)
        curvature = _bilinear(g, a1, a1) + _bilinear(g, diff, a2)
        s = s - slope / curvature
    at, _ = dst.evaluate(s)
    return float(np.max(np.linalg.norm((at - pts) @ chol, axis=1)))


def image_distance(
    metric: MetricSpec, a: InitialCurve, b: InitialCurve, samples: int = IMAGE_SAMPLES
) -> float:
    """
    Hausdorff distance between the point sets traced by a.k0 and b.k0, in the
    flip metric frozen at the mean node of `a`. Reparametrizations leave it at
    roundoff.
    """
    if a.dimension != b.dimension:
        raise ContractViolation("image_distance", "curves live in different dimensions")
    centre = a.k0.mean(axis=0)
    chol = np.linalg.cholesky(flip_metric_eval(metric, centre))
    return max(
        _directed_image_distance(a, b, chol, samples),
        _directed_image_distance(b, a, chol, samples),
    )


def null_decompose(metric: MetricSpec, curve: InitialCurve) -> NullData:
    """u = k0′ + k1, v = −k0′ + k1 with their C¹ flip-norm bounds."""
    ds = curve.tangent()
    u = ds + curve.k1
    v = -ds + curve.k1

    def _c1(w: FloatArray) -> float:
        value = np.max(flip_norm_at(metric, curve.k0, w))
        slope = np.max(flip_norm_at(metric, curve.k0, curve.derivative(w)))
        return float(max(value, slope))

    return NullData(curve.k0, u, v, _c1(u), _c1(v))


def _plane(dimension: int, axes: Sequence[int]) -> tuple[int, int]:
    if len(axes) != 2 or axes[0] == axes[1] or not all(0 < a < dimension for a in axes):
        raise ContractViolation("curve catalog", f"invalid spatial plane {tuple(axes)}")
    return int(axes[0]), int(axes[1])


def _time_field(n_nodes: int, dimension: int, speed: float) -> FloatArray:
    k1 = np.zeros((n_nodes, dimension))
    k1[:, 0] = speed
    return k1


def circle(
    n_nodes: int,
    radius: float = 1.0,
    dimension: int = 3,
    axes: Sequence[int] = (1, 2),
    speed: float = 1.0,
    period: float = TWO_PI,
) -> InitialCurve:
    """
    k0(x) = r(sin x e_a + cos x e_b), k1 = speed·e_0.

    ```pycon
    >>> c = circle(16)
    >>> c.k0[0].tolist(), c.k1[0].tolist()
    ([0.0, 0.0, 1.0], [1.0, 0.0, 0.0])

    ```
    """
    return ellipse(n_nodes, (radius, radius), dimension, axes, speed, period)


def ellipse(
    n_nodes: int,
    semi_axes: Sequence[float] = (2.0, 1.0),
    dimension: int = 3,
    axes: Sequence[int] = (1, 2),
    speed: float = 1.0,
    period: float = TWO_PI,
) -> InitialCurve:
    a, b = _plane(dimension, axes)
    x = np.arange(n_nodes) * TWO_PI / n_nodes
    k0 = np.zeros((n_nodes, dimension))
    k0[:, a] = semi_axes[0] * np.sin(x)
    k0[:, b] = semi_axes[1] * np.cos(x)
    return InitialCurve(k0, _time_field(n_nodes, dimension, speed), period=period)


def line(
    n_nodes: int,
    dimension: int = 3,
    axis: int = 1,
    speed: float = 1.0,
    period: float = TWO_PI,
) -> InitialCurve:
    """A straight string wound once around the periodic direction `axis`."""
    if not 0 < axis < dimension:
        raise ContractViolation("curve catalog", f"invalid winding axis {axis}")
    x = np.arange(n_nodes) * period / n_nodes
    k0 = np.zeros((n_nodes, dimension))
    k0[:, axis] = x
    winding = np.zeros(dimension)
    winding[axis] = period
    return InitialCurve(
        k0, _time_field(n_nodes, dimension, speed), period=period, winding=winding
    )


def load_node_file(
    path: StrPath, dimension: int, period: float = TWO_PI
) -> InitialCurve:
    """
    One node per line: x_j, then n coordinates of k0, then n components of k1,
    whitespace separated. Blank lines and `#` comments are ignored; nodes must
    be listed in order at x_j = j·P/N.
    """
    rows: list[list[float]] = []
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise SurfaceFormatError(str(path), e.strerror or str(e)) from None
    for lineno, raw in enumerate(lines, start=1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        fields = text.split()
        if len(fields) != 1 + 2 * dimension:
            raise SurfaceFormatError(
                str(path),
                f"line {lineno}: expected {1 + 2 * dimension} values, found {len(fields)}",
            )
        try:
            rows.append([float(f) for f in fields])
        except ValueError as e:
            raise SurfaceFormatError(str(path), f"line {lineno}: {e}") from None
    if not rows:
        raise SurfaceFormatError(str(path), "no nodes")
    data = np.array(rows)
    n_nodes = data.shape[0]
    expected = np.arange(n_nodes) * period / n_nodes
    if not np.allclose(data[:, 0], expected, rtol=0.0, atol=1e-9 * period):
        raise SurfaceFormatError(str(path), "nodes are not on the uniform grid j·P/N")
    if not is_power_of_two(n_nodes):
        raise SurfaceFormatError(str(path), f"node count {n_nodes} is not a power of two")
    return InitialCurve(data[:, 1 : 1 + dimension], data[:, 1 + dimension :], period=period)


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
