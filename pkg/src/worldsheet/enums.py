"""Enums are actually instantiated in code so they shouldn't be in the same file as non-instantiated types"""

from __future__ import annotations

import logging
from enum import Enum, auto
from pathlib import PurePath
from typing import Any

from typing_extensions import Self, override

logger = logging.getLogger(__name__)


class BaseStrEnum(Enum):
    """
    - Override `__str__` so it converts to the str of its value
    - Override `auto()` creation to make the name the lowercase of the member identifier
    """

    # Catalog ids arrive from YAML and CLI flags, so members compare by value
    # only after an explicit `Enum(value)` lookup.

    @override
    def __str__(self) -> str:
        return str(self.value)

    @staticmethod
    @override
    def _generate_next_value_(
        name: str, start: int, count: int, last_values: list[Any]
    ) -> str:
        return name.lower()


class SuccessStatus(BaseStrEnum):
    """Outcome of a run, check or strip; maps onto the CLI exit contract."""

    SUCCESS = auto()
    WARNING = auto()
    INVARIANT_VIOLATION = "invariant_violation"
    SOLVER_FAILURE = "solver_failure"

    @override
    def __str__(self) -> str:
        return self.value

    @property
    def exit_code(self) -> int:
        """
        ```pycon
        >>> SuccessStatus.SUCCESS.exit_code, SuccessStatus.WARNING.exit_code
        (0, 0)
        >>> SuccessStatus.INVARIANT_VIOLATION.exit_code
        2
        >>> SuccessStatus.SOLVER_FAILURE.exit_code
        3

        ```
        """
        return _EXIT_CODES[self]

    @staticmethod
    def worst(*statuses: SuccessStatus) -> SuccessStatus:
        """
        ```pycon
        >>> SuccessStatus.worst()
        <SuccessStatus.SUCCESS: 'success'>
        >>> SuccessStatus.worst(SuccessStatus.WARNING, SuccessStatus.SOLVER_FAILURE)
        <SuccessStatus.SOLVER_FAILURE: 'solver_failure'>

        ```
        """
        order = list(_EXIT_ORDER)
        return max(statuses, key=order.index, default=SuccessStatus.SUCCESS)


_EXIT_ORDER = (
    SuccessStatus.SUCCESS,
    SuccessStatus.WARNING,
    SuccessStatus.INVARIANT_VIOLATION,
    SuccessStatus.SOLVER_FAILURE,
)
_EXIT_CODES = {
    SuccessStatus.SUCCESS: 0,
    SuccessStatus.WARNING: 0,
    SuccessStatus.INVARIANT_VIOLATION: 2,
    SuccessStatus.SOLVER_FAILURE: 3,
}


class MetricKind(BaseStrEnum):
    MINKOWSKI = auto()
    FLRW = auto()
    USER = auto()


class ScaleFactorKind(BaseStrEnum):
    """Catalog of FLRW scale factors: a(t) = c, e^{Ht}, 1 + εt²."""

    CONSTANT = auto()
    EXPONENTIAL = auto()
    POLYNOMIAL = auto()


class CurveKind(BaseStrEnum):
    CIRCLE = auto()
    ELLIPSE = auto()
    LINE = auto()
    FILE = auto()
    ORACLE = auto()


class Provenance(BaseStrEnum):
    RAW = auto()
    CONFORMALIZED = auto()


class DerivativeScheme(BaseStrEnum):
    SPECTRAL = auto()
    FD4 = auto()


class ViolationKind(BaseStrEnum):
    """Admissibility hypotheses on initial data."""

    NOT_SPACELIKE = "not_spacelike"
    NOT_TIMELIKE = "not_timelike"
    DEGENERATE = auto()
    NOT_ORTHOGONAL = "not_orthogonal"
    NORM_MISMATCH = "norm_mismatch"
    PAST_DIRECTED = "past_directed"


class CausalViolationKind(BaseStrEnum):
    NOT_CAUSAL = "not_causal"
    WRONG_TIME_DIRECTION = "wrong_time_direction"
    NOT_SPACELIKE = "not_spacelike"


class OracleName(BaseStrEnum):
    MINKOWSKI_CIRCLE = "minkowski-circle"
    FLAT_LINEAR = "flat-linear"
    FLAT_TRAVELLING_WAVE = "flat-travelling-wave"


class WaveProfile(BaseStrEnum):
    CIRCLE = auto()
    FIGURE_EIGHT = "figure-eight"


class StudyMode(BaseStrEnum):
    SINGLE = auto()
    CONVERGENCE = auto()
    STABILITY = auto()
    BACKWARD = auto()


class ExportFormat(BaseStrEnum):
    CSV = auto()
    JSON = auto()

    @classmethod
    def from_path(cls, path: str | PurePath) -> Self:
        """
        Infer the surface format from a file suffix.

        ```pycon
        >>> ExportFormat.from_path("out/surface.json")
        <ExportFormat.JSON: 'json'>
        >>> ExportFormat.from_path("surface.CSV")
        <ExportFormat.CSV: 'csv'>
        >>> ExportFormat.from_path("surface.txt")
        <ExportFormat.CSV: 'csv'>

        ```
        """
        suffix = PurePath(path).suffix.lower().lstrip(".")
        if suffix in cls._value2member_map_:
            return cls(suffix)
        logger.debug(f"Unrecognised surface suffix {suffix!r}; assuming CSV.")
        return cls(cls.CSV)


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
