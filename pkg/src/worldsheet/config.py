"""
Run configuration: a YAML file with sections `metric`, `curve`, `solver`,
`tolerances`, `output` and `study`, plus top-level `resolution`,
`target_time` and `backward`. Unknown keys are errors.
"""

from __future__ import annotations

import importlib
import logging
import math
import os
import re
from collections.abc import Mapping, MutableMapping, Sequence
from pathlib import Path
from typing import Any

import attr
import cattrs
import yaml
from beartype import beartype

from ._types import AUTO_DELTA, AutoDeltaSentinel
from .char_solver import SolverSettings
from .converters import get_converter
from .diagnostics import DiagnosticTolerances, OracleParams, oracle_curve
from .enums import (
    CurveKind,
    DerivativeScheme,
    ExportFormat,
    MetricKind,
    OracleName,
    ScaleFactorKind,
    StudyMode,
    WaveProfile,
)
from .exceptions import ConfigError
from .initial_data import (
    InitialCurve,
    circle,
    ellipse,
    is_power_of_two,
    line,
    load_node_file,
)
from .target_manifold import MetricSpec, ScaleFactor

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "WORLDSHEET_OUTPUT_DIR"
MIN_RESOLUTION = 16


def _positive(_: object, attribute: attr.Attribute[float], value: float) -> None:
    if not value > 0:
        raise ValueError(f"{attribute.name} must be positive, got {value}")


def _finite(_: object, attribute: attr.Attribute[float], value: float) -> None:
    if not math.isfinite(value):
        raise ValueError(f"{attribute.name} must be finite, got {value}")


def _load_callable(ref: str) -> Any:
    """Resolve ``package.module:attribute``."""
    module_name, _, attr_name = ref.partition(":")
    if not module_name or not attr_name:
        raise ConfigError("metric", [f"expected 'module:attribute', got {ref!r}"])
    try:
        target = getattr(importlib.import_module(module_name), attr_name)
    except (ImportError, AttributeError) as e:
        raise ConfigError("metric", [f"cannot load {ref!r}: {e}"]) from None
    if not callable(target):
        raise ConfigError("metric", [f"{ref!r} is not callable"])
    return target


@attr.define(frozen=True)
class ScaleFactorConfig:
    kind: ScaleFactorKind = ScaleFactorKind.CONSTANT
    value: float = attr.field(default=1.0, validator=_positive)
    rate: float = attr.field(default=0.0, validator=_finite)
    epsilon: float = attr.field(default=0.0, validator=_finite)

    def build(self) -> ScaleFactor:
        return ScaleFactor(self.kind, self.value, self.rate, self.epsilon)


@attr.define(frozen=True)
class MetricConfig:
    kind: MetricKind = MetricKind.MINKOWSKI
    dimension: int = attr.field(default=3)
    scale_factor: ScaleFactorConfig = attr.field(factory=ScaleFactorConfig)
    spatial_metric: str | None = None
    christoffel: str | None = None
    injectivity_radius: float = attr.field(default=math.inf, validator=_positive)

    @dimension.validator
    def _check_dimension(self, _: attr.Attribute[int], value: int) -> None:
        if value < 2:
            raise ValueError(f"metric.dimension must be at least 2, got {value}")

    def __attrs_post_init__(self) -> None:
        if self.kind is MetricKind.USER and self.spatial_metric is None:
            raise ValueError("metric.spatial_metric is required for kind 'user'")

    def build(self) -> MetricSpec:
        match self.kind:
            case MetricKind.MINKOWSKI:
                return MetricSpec.minkowski(self.dimension)
            case MetricKind.FLRW:
                return MetricSpec.flrw(self.dimension, self.scale_factor.build())
            case MetricKind.USER:
                assert self.spatial_metric is not None
                return MetricSpec.user(
                    self.dimension,
                    _load_callable(self.spatial_metric),
                    None if self.christoffel is None else _load_callable(self.christoffel),
                    injectivity_radius=self.injectivity_radius,
                )


@attr.define(frozen=True)
class CurveConfig:
    kind: CurveKind = CurveKind.CIRCLE
    radius: float = attr.field(default=1.0, validator=_positive)
    semi_axes: tuple[float, float] = (2.0, 1.0)
    axes: tuple[int, int] = (1, 2)
    axis: int = 1
    speed: float = attr.field(default=1.0, validator=_positive)
    path: str | None = None
    oracle: OracleName | None = None
    beta: float = attr.field(default=0.0, validator=_finite)
    profile: WaveProfile = WaveProfile.CIRCLE
    amplitude: float = attr.field(default=0.5, validator=_positive)
    project_k1: bool = False
    conformalize: bool = True
    scheme: DerivativeScheme = DerivativeScheme.SPECTRAL

    def __attrs_post_init__(self) -> None:
        if self.kind is CurveKind.FILE and self.path is None:
            raise ValueError("curve.path is required for kind 'file'")
        if self.kind is CurveKind.ORACLE and self.oracle is None:
            raise ValueError("curve.oracle is required for kind 'oracle'")
        if any(a <= 0 for a in self.semi_axes):
            raise ValueError("curve.semi_axes must be positive")

    def oracle_params(self, dimension: int) -> OracleParams:
        return OracleParams(
            radius=self.radius,
            beta=self.beta,
            profile=self.profile,
            amplitude=self.amplitude,
            dimension=dimension,
        )

    def build(self, n_nodes: int, dimension: int) -> InitialCurve:
        match self.kind:
            case CurveKind.CIRCLE:
                curve = circle(n_nodes, self.radius, dimension, self.axes, self.speed)
            case CurveKind.ELLIPSE:
                curve = ellipse(n_nodes, self.semi_axes, dimension, self.axes, self.speed)
            case CurveKind.LINE:
                curve = line(n_nodes, dimension, self.axis, self.speed)
            case CurveKind.FILE:
                assert self.path is not None
                curve = load_node_file(self.path, dimension)
                if curve.n_nodes != n_nodes:
                    logger.info(f"Resampling {self.path} from {curve.n_nodes} to {n_nodes} nodes")
                    curve = curve.resampled(n_nodes)
            case CurveKind.ORACLE:
                assert self.oracle is not None
                curve = oracle_curve(self.oracle, n_nodes, self.oracle_params(dimension))
        return attr.evolve(curve, scheme=self.scheme)


@attr.define(frozen=True)
class SolverConfig:
    delta: float | AutoDeltaSentinel = AUTO_DELTA
    max_iter: int = 50
    n_samples: int = 16
    safety: float = 1.5
    starvation_ratio: float = 0.5
    patience: int = 8
    max_rows: int = 100_000
    seed_perturbation: bool = False


@attr.define(frozen=True)
class TolerancesConfig:
    picard: float = attr.field(default=1e-10, validator=_positive)
    null_drift: float = attr.field(default=1e-5, validator=_positive)
    causal: float = attr.field(default=1e-8, validator=_positive)
    conformal: float = attr.field(default=1e-5, validator=_positive)
    oracle: float = attr.field(default=5e-4, validator=_positive)
    admissibility: float = attr.field(default=1e-8, validator=_positive)
    contraction: float = attr.field(default=0.9, validator=_positive)

    def diagnostics(self) -> DiagnosticTolerances:
        return DiagnosticTolerances(
            causal=self.causal,
            null_drift=self.null_drift,
            conformal=self.conformal,
            oracle=self.oracle,
            picard=self.picard,
            contraction=self.contraction,
        )


@attr.define(frozen=True)
class OutputConfig:
    # left out of the report echo; it may come from the environment
    directory: str = attr.field(default="out", metadata={"omit": True})
    surface_format: ExportFormat = ExportFormat.CSV
    write_surface: bool = True


@attr.define(frozen=True)
class StudyConfig:
    mode: StudyMode = StudyMode.SINGLE
    levels: int = 3
    epsilons: tuple[float, ...] = (1e-3, 5e-4)
    component: int = 1
    mode_number: int = 1

    def __attrs_post_init__(self) -> None:
        if self.mode is StudyMode.CONVERGENCE and self.levels < 3:
            raise ValueError(f"study.levels must be at least 3, got {self.levels}")
        if self.mode is StudyMode.STABILITY and len(self.epsilons) < 2:
            raise ValueError("study.epsilons needs at least two perturbation sizes")
        if any(not e > 0 for e in self.epsilons):
            raise ValueError("study.epsilons must be positive")


@attr.define(frozen=True)
class RunConfig:
    metric: MetricConfig = attr.field(factory=MetricConfig)
    curve: CurveConfig = attr.field(factory=CurveConfig)
    solver: SolverConfig = attr.field(factory=SolverConfig)
    tolerances: TolerancesConfig = attr.field(factory=TolerancesConfig)
    output: OutputConfig = attr.field(factory=OutputConfig)
    study: StudyConfig = attr.field(factory=StudyConfig)
    resolution: int = attr.field(default=128)
    target_time: float = attr.field(default=1.0, validator=_finite)
    backward: bool = False

    @resolution.validator
    def _check_resolution(self, _: attr.Attribute[int], value: int) -> None:
        if value < MIN_RESOLUTION or not is_power_of_two(value):
            raise ValueError(
                f"resolution must be a power of two >= {MIN_RESOLUTION}, got {value}"
            )

    def __attrs_post_init__(self) -> None:
        if self.backward and self.target_time >= 0:
            raise ValueError("backward runs need a negative target_time")
        if not self.backward and self.target_time <= 0:
            raise ValueError("forward runs need a positive target_time")
        if self.curve.kind is CurveKind.ORACLE:
            if self.metric.kind is not MetricKind.MINKOWSKI:
                raise ValueError("oracle curves are closed-form only in Minkowski space")
            if self.metric.dimension < 3:
                raise ValueError("oracle curves need metric.dimension >= 3")
        if self.curve.kind is CurveKind.LINE and self.metric.kind is MetricKind.USER:
            raise ValueError("wound curves need a spatially homogeneous metric")
        self.solver_settings()

    @property
    def reference(self) -> OracleName | None:
        """Oracle the run is compared against, if any."""
        return self.curve.oracle if self.curve.kind is CurveKind.ORACLE else None

    def solver_settings(self, **changes: Any) -> SolverSettings:
        s = self.solver
        settings = SolverSettings(
            tol=self.tolerances.picard,
            max_iter=s.max_iter,
            delta=s.delta,
            n_samples=s.n_samples,
            safety=s.safety,
            starvation_ratio=s.starvation_ratio,
            patience=s.patience,
            max_rows=s.max_rows,
            seed_perturbation=s.seed_perturbation,
            require_conformal=self.curve.conformalize,
            admissibility_tol=self.tolerances.admissibility,
        )
        return attr.evolve(settings, **changes) if changes else settings

    def build_metric(self) -> MetricSpec:
        return self.metric.build()

    def build_curve(self, n_nodes: int | None = None) -> InitialCurve:
        return self.curve.build(n_nodes or self.resolution, self.metric.dimension)


_converter = get_converter(forbid_extra_keys=True, omit=(OutputConfig,))


def _line_index(text: str) -> dict[str, int]:
    """`$.section.key` -> 1-based line of the key in the YAML source."""
    index: dict[str, int] = {}

    def walk(node: yaml.Node, path: str) -> None:
        if isinstance(node, yaml.MappingNode):
            for key, value in node.value:
                sub = f"{path}.{key.value}"
                index[sub] = key.start_mark.line + 1
                walk(value, sub)
        elif isinstance(node, yaml.SequenceNode):
            for i, item in enumerate(node.value):
                index[f"{path}[{i}]"] = item.start_mark.line + 1
                walk(item, f"{path}[{i}]")

    root = yaml.compose(text)
    if root is not None:
        walk(root, "$")
    return index


_EXTRA = re.compile(r"extra fields found \((?P<keys>[^)]*)\)")


def _lookup_line(index: Mapping[str, int], path: str) -> int | None:
    while path:
        if path in index:
            return index[path]
        path = path.rpartition(".")[0] if "." in path else ""
    return None


def _format_exception(exc: BaseException, type_: type | None) -> str:
    if isinstance(exc, cattrs.ForbiddenExtraKeysError):
        return f"extra fields found ({', '.join(sorted(map(str, exc.extra_fields)))})"
    if isinstance(exc, KeyError):
        return "required field missing"
    return str(exc) or type(exc).__name__


def _locate(message: str, index: Mapping[str, int]) -> str:
    text, _, path = message.rpartition(" @ ")
    if not text:
        return message
    lookup = path
    if m := _EXTRA.match(text):
        lookup = f"{path}.{m.group('keys').split(', ')[0]}"
    line = _lookup_line(index, lookup)
    where = f"{path} (line {line})" if line is not None else path
    return f"{where}: {text}"


def apply_overrides(
    data: MutableMapping[str, Any], overrides: Sequence[str]
) -> MutableMapping[str, Any]:
    """
    Apply ``section.key=value`` assignments; values are parsed as YAML.

    ```pycon
    >>> apply_overrides({"solver": {"max_iter": 50}}, ["solver.max_iter=80", "resolution=64"])
    {'solver': {'max_iter': 80}, 'resolution': 64}

    ```
    """
    if isinstance(overrides, str):
        raise ConfigError("--set", ["overrides must be a list of key=value strings"])
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep or not key.strip():
            raise ConfigError("--set", [f"expected section.key=value, got {item!r}"])
        *parents, leaf = key.strip().split(".")
        node: MutableMapping[str, Any] = data
        for part in parents:
            child = node.setdefault(part, {})
            if not isinstance(child, MutableMapping):
                raise ConfigError("--set", [f"{key}: {part!r} is not a section"])
            node = child
        node[leaf] = yaml.safe_load(raw) if raw.strip() else None
    return data


def structure_config(
    data: Mapping[str, Any], source: str = "<mapping>", text: str | None = None
) -> RunConfig:
    index = _line_index(text) if text else {}
    try:
        return _converter.structure(dict(data), RunConfig)
    except cattrs.BaseValidationError as e:
        messages = cattrs.transform_error(e, path="$", format_exception=_format_exception)
        raise ConfigError(source, [_locate(m, index) for m in messages]) from None
    except (ValueError, TypeError) as e:
        raise ConfigError(source, [str(e)]) from None


@beartype
def parse_config(path: str | os.PathLike[str], overrides: Sequence[str] = ()) -> RunConfig:
    """Load, override and strictly validate a run configuration."""
    source = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(source, [f"cannot read file: {e.strerror}"]) from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(source, [f"invalid YAML: {e}"]) from None
    if data is None:
        data = {}
    if not isinstance(data, MutableMapping):
        raise ConfigError(source, ["top level must be a mapping of sections"])
    config = structure_config(apply_overrides(data, overrides), source, text)
    logger.debug(f"Parsed {source} with {len(overrides)} override(s)")
    return config


def apply_environment(
    config: RunConfig, environ: Mapping[str, str] | None = None
) -> RunConfig:
    """`WORLDSHEET_OUTPUT_DIR` replaces the configured output directory."""
    env = os.environ if environ is None else environ
    directory = env.get(OUTPUT_DIR_ENV)
    if not directory:
        return config
    logger.info(f"Output directory overridden by {OUTPUT_DIR_ENV}={directory}")
    return attr.evolve(config, output=attr.evolve(config.output, directory=directory))


def echo_config(config: RunConfig) -> dict[str, Any]:
    """The config as written into run reports."""
    return _converter.to_payload(config)


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
