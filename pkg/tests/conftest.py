from __future__ import annotations

from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest
import yaml

from worldsheet import MetricSpec, ScaleFactor, ScaleFactorKind, SolverSettings
from worldsheet.char_solver import SolutionSurface, continue_to_time
from worldsheet.initial_data import InitialCurve, circle

FLRW_RATE = 0.1


@pytest.fixture(scope="session")
def minkowski() -> MetricSpec:
    return MetricSpec.minkowski(3)


@pytest.fixture(scope="session")
def flrw() -> MetricSpec:
    return MetricSpec.flrw(3, ScaleFactor(ScaleFactorKind.EXPONENTIAL, rate=FLRW_RATE))


@pytest.fixture(scope="session")
def flrw_run(flrw: MetricSpec) -> SolutionSurface:
    """Conformal circle in a(t) = e^{0.1 t}, N = 256, solved to T = 1."""
    return continue_to_time(flrw, circle(256), 1.0, SolverSettings())


@pytest.fixture(scope="session")
def flrw_run_coarse(flrw: MetricSpec) -> SolutionSurface:
    return continue_to_time(flrw, circle(128), 1.0, SolverSettings())


@pytest.fixture(scope="session")
def minkowski_runs(minkowski: MetricSpec) -> dict[int, SolutionSurface]:
    """The unit circle at N = 256 and N = 512, solved to T = 1.2."""
    return {n: continue_to_time(minkowski, circle(n), 1.2) for n in (256, 512)}


@pytest.fixture
def small_circle() -> InitialCurve:
    return circle(32)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[..., Path]:
    """Dump a config mapping to YAML, pointing the output into tmp_path."""

    def _write(data: dict[str, Any], name: str = "run.yaml") -> Path:
        body = {"output": {"directory": str(tmp_path / "out")}, **data}
        path = tmp_path / name
        path.write_text(yaml.safe_dump(body, sort_keys=False), encoding="utf-8")
        return path

    return _write


@pytest.fixture
def write_nodes(tmp_path: Path) -> Callable[..., Path]:
    """Write (k0, k1) samples in the node-file format."""

    def _write(k0: np.ndarray, k1: np.ndarray, name: str = "nodes.txt") -> Path:
        n = k0.shape[0]
        x = np.arange(n) * 2.0 * np.pi / n
        lines = ["# x k0 k1"]
        for j in range(n):
            values = [x[j], *k0[j], *k1[j]]
            lines.append(" ".join(format(float(v), ".17g") for v in values))
        path = tmp_path / name
        path.write_text("\n".join(lines) + "\n", encoding="utf-8")
        return path

    return _write
