"""
Two roots, one per CLI exit code:

- `ValidationError` (exit 2): a hypothesis, contract or invariant does not hold.
- `SolverFailure` (exit 3): the numerics broke down.
"""

# pyright: reportPrivateUsage=false
from __future__ import annotations

from collections.abc import Iterable
from typing import TYPE_CHECKING, Any

from ._types import FloatArray

if TYPE_CHECKING:
    from .char_solver import SolutionSurface
    from .initial_data import Violation


def _fmt_point(point: FloatArray | Iterable[float]) -> str:
    return "(" + ", ".join(f"{float(c):.6g}" for c in point) + ")"


class ValidationError(BaseException):
    """BaseException for violating class invariants"""

    pass


class ConfigError(ValidationError):
    """Config file failed schema validation"""

    def __init__(self, source: str, messages: Iterable[str]) -> None:
        self.source = source
        self.messages = list(messages)
        joined = "\n  ".join(self.messages)
        super().__init__(f"Invalid config {source}:\n  {joined}")


class ContractViolation(ValidationError):
    """Caller broke an operation's precondition"""

    def __init__(self, operation: str, reason: str) -> None:
        self.operation = operation
        super().__init__(f"{operation}: {reason}")


class AdmissibilityError(ValidationError):
    """Initial data fails the hypotheses required by the requested run"""

    def __init__(self, violations: Iterable[Violation]) -> None:
        self.violations = list(violations)
        listed = "; ".join(str(v) for v in self.violations)
        super().__init__(f"Inadmissible initial data: {listed}")


class DegenerateDataError(ValidationError):
    """u̲ + v̲ = 0: a strip cannot be sized"""

    def __init__(self, row_time: float) -> None:
        super().__init__(
            f"Characteristic data vanish on the row at t={row_time:.6g}; strip height undefined"
        )


class GeometryViolation(ValidationError):
    """Pulled-back metric is Riemannian on non-degenerate nodes"""

    def __init__(self, nodes: Iterable[tuple[int, int]], worst_det: float) -> None:
        self.nodes = list(nodes)
        head = ", ".join(f"(row={r}, col={c})" for r, c in self.nodes[:5])
        more = f" and {len(self.nodes) - 5} more" if len(self.nodes) > 5 else ""
        super().__init__(
            f"Pulled-back metric is not Lorentzian at {head}{more} (largest det={worst_det:.3e})"
        )


class IncompleteSurfaceError(ValidationError):
    """Surface does not reach the requested time slice"""

    def __init__(self, target: float, column: int | None = None) -> None:
        self.target = target
        self.column = column
        where = f"column {column}" if column is not None else "initial row"
        super().__init__(f"Time slice y0={target:.6g} not crossed on {where}")


class CatalogError(ValidationError):
    """Unknown catalog id"""

    def __init__(self, catalog: str, name: object, known: Iterable[object]) -> None:
        options = ", ".join(str(k) for k in known)
        super().__init__(f"Unknown {catalog} {name!r}; expected one of: {options}")


class SurfaceFormatError(ValidationError):
    """Exported surface file cannot be read back"""

    def __init__(self, path: str, reason: str) -> None:
        super().__init__(f"Cannot read surface {path}: {reason}")


class SolverFailure(RuntimeError):
    """Numerical breakdown; may carry the partial surface computed so far"""

    def __init__(self, *args: Any) -> None:
        super().__init__(*args)
        self.partial: SolutionSurface | None = None


class MetricEvaluationError(SolverFailure):
    """Metric produced non-finite entries"""

    def __init__(self, point: FloatArray | Iterable[float], reason: str = "non-finite metric entries") -> None:
        self.point = tuple(float(c) for c in point)
        super().__init__(f"{reason} at p={_fmt_point(self.point)}")


class FactorizationError(MetricEvaluationError):
    """Spatial metric block not positive definite"""

    def __init__(self, point: FloatArray | Iterable[float]) -> None:
        super().__init__(point, reason="spatial metric not positive definite")


class BlowUpError(SolverFailure):
    def __init__(self, row_time: float, detail: str = "non-finite transport output") -> None:
        self.row_time = row_time
        super().__init__(f"Blow-up in strip starting at t={row_time:.6g}: {detail}")


class NonConvergenceError(SolverFailure):
    def __init__(self, row_time: float, iterations: int, change: float, ratio: float) -> None:
        self.iterations = iterations
        self.ratio = ratio
        super().__init__(
            f"Picard iteration for strip at t={row_time:.6g} did not converge in {iterations} sweeps "
            + f"(last change={change:.3e}, contraction ratio={ratio:.3f})"
        )


class StepStarvationError(SolverFailure):
    def __init__(self, row_time: float, ratio: float, region: tuple[FloatArray, FloatArray]) -> None:
        self.ratio = ratio
        lo, hi = region
        super().__init__(
            f"Step starvation at t={row_time:.6g}: admissible strip height is {ratio:.3g}·h "
            + f"in region {_fmt_point(lo)}..{_fmt_point(hi)}"
        )


class MonotonicityError(SolverFailure):
    """y0 decreased along a column or characteristic diagonal"""

    def __init__(self, row: int, column: int, drop: float, direction: str) -> None:
        super().__init__(
            f"y0 decreased by {drop:.3e} along {direction} into row {row}, column {column}"
        )


class RefinementError(SolverFailure):
    """Resampled curve is under-resolved"""

    def __init__(self, n_nodes: int, top_energy_ratio: float) -> None:
        super().__init__(
            f"Reparametrized curve aliases at N={n_nodes} (top-band energy ratio {top_energy_ratio:.2e}); "
            + "increase the resolution"
        )


class SurfaceStallError(SolverFailure):
    def __init__(self, rows: int, reached: float, target: float) -> None:
        super().__init__(
            f"Surface stalled after {rows} rows at min y0={reached:.6g} below target {target:.6g}"
        )
