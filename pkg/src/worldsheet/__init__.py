"""Closed-string worldsheets as Lorentzian wave maps on a characteristic lattice."""

from __future__ import annotations

from ._types import (
    AUTO_DELTA,
    AutoDeltaSentinel,
    JSONScalar,
    JSONType,
    LoggerEvent,
    LoggerEventProto,
    SentinelMeta,
)
from .char_solver import (
    SolutionSurface,
    SolverSettings,
    continue_to_time,
    picard_strip_solve,
    solve_backward,
    strip_estimate,
)
from .enums import (
    BaseStrEnum,
    CurveKind,
    MetricKind,
    OracleName,
    ScaleFactorKind,
    StudyMode,
    SuccessStatus,
)
from .exceptions import SolverFailure, ValidationError
from .initial_data import InitialCurve, conformalize, null_decompose, validate
from .target_manifold import MetricSpec, ScaleFactor

__all__ = [
    "AUTO_DELTA",
    "AutoDeltaSentinel",
    "BaseStrEnum",
    "CurveKind",
    "InitialCurve",
    "JSONScalar",
    "JSONType",
    "LoggerEvent",
    "LoggerEventProto",
    "MetricKind",
    "MetricSpec",
    "OracleName",
    "ScaleFactor",
    "ScaleFactorKind",
    "SentinelMeta",
    "SolutionSurface",
    "SolverFailure",
    "SolverSettings",
    "StudyMode",
    "SuccessStatus",
    "ValidationError",
    "conformalize",
    "continue_to_time",
    "null_decompose",
    "picard_strip_solve",
    "solve_backward",
    "strip_estimate",
    "validate",
]
