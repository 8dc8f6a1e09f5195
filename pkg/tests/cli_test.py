from __future__ import annotations

import json
from collections.abc import Callable
from pathlib import Path
from typing import Any

import numpy as np
import pytest

from worldsheet.cli import main
from worldsheet.config import OUTPUT_DIR_ENV
from worldsheet.export import read_surface
from worldsheet.initial_data import circle

FLAT_LINE: dict[str, Any] = {
    "curve": {"kind": "oracle", "oracle": "flat-linear"},
    "resolution": 16,
    "target_time": 0.5,
}


@pytest.fixture(autouse=True)
def _no_output_env(monkeypatch: pytest.MonkeyPatch):
    monkeypatch.delenv(OUTPUT_DIR_ENV, raising=False)


def _report(directory: Path) -> dict[str, Any]:
    return json.loads((directory / "run_report.json").read_text(encoding="utf-8"))


def _tilted_config(write_config: Callable[..., Path], write_nodes: Callable[..., Path]) -> Path:
    k1 = np.tile([1.0, 0.3, 0.0], (16, 1))
    nodes = write_nodes(circle(16).k0, k1)
    return write_config({"curve": {"kind": "file", "path": str(nodes)}, "resolution": 16})


def test_run_succeeds(tmp_path: Path, write_config: Callable[..., Path], capsys: pytest.CaptureFixture[str]):
    out = tmp_path / "out"
    assert main(["run", str(write_config(FLAT_LINE))]) == 0
    assert "exit=0" in capsys.readouterr().out
    assert (out / "surface.csv").exists()
    assert _report(out)["rows"] >= 2


def test_shipped_minkowski_circle_passes_every_check(tmp_path: Path):
    config = Path(__file__).parents[1] / "configs" / "minkowski_circle.yaml"
    out = tmp_path / "circle"
    argv = ["run", str(config), "--resolution", "128", "--output-dir", str(out)]
    assert main([*argv, "--set", "tolerances.oracle=5e-3"]) == 0
    diagnostics = json.loads((out / "diagnostics.json").read_text(encoding="utf-8"))
    assert [c["name"] for c in diagnostics["checks"] if not c["passed"]] == []
    assert {"null_drift", "oracle_error", "residual_vs_oracle"} <= {c["name"] for c in diagnostics["checks"]}


def test_runs_are_byte_identical(tmp_path: Path, write_config: Callable[..., Path]):
    config = str(write_config(FLAT_LINE))
    for name in ("a", "b"):
        assert main(["run", config, "--output-dir", str(tmp_path / name)]) == 0
    for artifact in ("run_report.json", "surface.csv", "diagnostics.json"):
        assert (tmp_path / "a" / artifact).read_bytes() == (tmp_path / "b" / artifact).read_bytes()


def test_inadmissible_data_exit_2(
    tmp_path: Path, write_config: Callable[..., Path], write_nodes: Callable[..., Path]
):
    assert main(["run", str(_tilted_config(write_config, write_nodes))]) == 2
    report = _report(tmp_path / "out")
    assert report["status"] == "invariant_violation"
    assert report["violations"]


def test_solver_failure_exit_3(tmp_path: Path, write_config: Callable[..., Path]):
    path = write_config({"resolution": 32, "target_time": 0.5})
    assert main(["run", str(path), "--set", "solver.max_iter=1"]) == 3
    assert (tmp_path / "out" / "partial_surface.csv").exists()
    assert _report(tmp_path / "out")["failure"]["type"] == "NonConvergenceError"


def test_config_errors_exit_2(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    path = tmp_path / "typo.yaml"
    _ = path.write_text("metricc:\n  kind: minkowski\n", encoding="utf-8")
    assert main(["run", str(path)]) == 2
    assert "metricc" in capsys.readouterr().err


def test_backward_run(tmp_path: Path, write_config: Callable[..., Path]):
    path = write_config(FLAT_LINE)
    assert main(["run", str(path), "--backward", "--target-time", "-0.5"]) == 0
    report = _report(tmp_path / "out")
    assert report["direction"] == "backward"
    assert report["reached_time"] <= -0.5
    surface = read_surface(tmp_path / "out" / "surface.csv")
    assert surface.time_orientation == -1


def test_environment_picks_the_output_directory(
    tmp_path: Path, write_config: Callable[..., Path], monkeypatch: pytest.MonkeyPatch
):
    elsewhere = tmp_path / "elsewhere"
    monkeypatch.setenv(OUTPUT_DIR_ENV, str(elsewhere))
    assert main(["run", str(write_config(FLAT_LINE))]) == 0
    assert (elsewhere / "run_report.json").exists()
    assert not (tmp_path / "out").exists()


def test_validate_only(
    write_config: Callable[..., Path],
    write_nodes: Callable[..., Path],
    capsys: pytest.CaptureFixture[str],
):
    assert main(["validate-only", str(write_config({}))]) == 0
    assert "initial data admissible" in capsys.readouterr().out

    assert main(["validate-only", str(_tilted_config(write_config, write_nodes))]) == 2
    assert "ERROR: k0' not orthogonal" in capsys.readouterr().out


def test_convergence_study(tmp_path: Path, write_config: Callable[..., Path]):
    path = write_config(FLAT_LINE)
    assert main(["study", str(path), "--mode", "convergence", "--levels", "3"]) == 0
    report = json.loads((tmp_path / "out" / "study_report.json").read_text(encoding="utf-8"))
    assert report["mode"] == "convergence"
    assert report["flags"] == []
    assert (tmp_path / "out" / "study_table.csv").exists()


def test_oracle_dump(tmp_path: Path, capsys: pytest.CaptureFixture[str]):
    target = tmp_path / "circle.json"
    assert main(["oracle", "minkowski-circle", str(target), "--resolution", "32", "--target-time", "0.5"]) == 0
    assert "wrote 3x32" in capsys.readouterr().out
    s = read_surface(target)
    assert (s.n_rows, s.n_nodes) == (3, 32)
    np.testing.assert_allclose(s.y[0], circle(32).k0, atol=1e-15)


def test_unknown_verb_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        _ = main(["explode"])
    assert excinfo.value.code == 2
