from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest

from worldsheet.char_solver import SolutionSurface, continue_to_time, solve_backward
from worldsheet.diagnostics import summarize
from worldsheet.enums import ExportFormat
from worldsheet.exceptions import SurfaceFormatError
from worldsheet.export import (
    diagnostics_payload,
    read_surface,
    surface_columns,
    write_diagnostics,
    write_surface,
    write_table,
)
from worldsheet.initial_data import circle, line
from worldsheet.target_manifold import MetricSpec


@pytest.fixture(scope="module")
def curved_surface(flrw: MetricSpec) -> SolutionSurface:
    return continue_to_time(flrw, circle(32), 0.5)


def _assert_same(a: SolutionSurface, b: SolutionSurface) -> None:
    for name in ("t", "y", "u", "v", "valid", "winding"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name), err_msg=name)
    assert (a.period, a.h, a.scale, a.time_orientation) == (b.period, b.h, b.scale, b.time_orientation)
    assert a.strips == b.strips


@pytest.mark.parametrize("fmt", list(ExportFormat))
def test_surfaces_read_back_bit_identical(tmp_path: Path, curved_surface: SolutionSurface, fmt: ExportFormat):
    path = write_surface(curved_surface, tmp_path / f"surface.{fmt}")
    assert path.exists()
    _assert_same(curved_surface, read_surface(path))


def test_wound_surface_keeps_its_winding(tmp_path: Path, minkowski: MetricSpec):
    s = continue_to_time(minkowski, line(16), 0.5)
    loaded = read_surface(write_surface(s, tmp_path / "line.csv"))
    _assert_same(s, loaded)
    assert loaded.winding.tolist() == [0.0, 2 * np.pi, 0.0]


def test_backward_surfaces_are_written_in_increasing_time(tmp_path: Path, minkowski: MetricSpec):
    s = solve_backward(minkowski, circle(16), -0.5)
    path = write_surface(s, tmp_path / "backward.csv")
    data_rows = [ln for ln in path.read_text(encoding="utf-8").splitlines() if not ln.startswith("#")][1:]
    times = [float(r.split(",")[2]) for r in data_rows]
    assert times == sorted(times)
    assert times[-1] == 0.0

    loaded = read_surface(path)
    assert loaded.time_orientation == -1
    _assert_same(s, loaded)

    payload = json.loads(write_surface(s, tmp_path / "backward.json").read_text(encoding="utf-8"))
    assert payload["t"] == sorted(payload["t"])


def test_csv_layout(tmp_path: Path, curved_surface: SolutionSurface):
    text = write_surface(curved_surface, tmp_path / "surface.csv").read_text(encoding="utf-8")
    lines = text.splitlines()
    assert lines[0] == "# format=worldsheet-surface"
    assert lines[1] == "# version=1"
    assert sum(ln.startswith("# strip=") for ln in lines) == len(curved_surface.strips)
    header = next(ln for ln in lines if not ln.startswith("#"))
    assert header.split(",") == surface_columns(3)
    body = lines[lines.index(header) + 1 :]
    assert len(body) == curved_surface.n_rows * curved_surface.n_nodes


def test_diagnostics_survive_the_round_trip(tmp_path: Path, flrw: MetricSpec, curved_surface: SolutionSurface):
    loaded = read_surface(write_surface(curved_surface, tmp_path / "surface.json"))
    before = diagnostics_payload(summarize(flrw, curved_surface, conformal=True, t_target=0.5))
    after = diagnostics_payload(summarize(flrw, loaded, conformal=True, t_target=0.5))
    assert before == after

    path = write_diagnostics(summarize(flrw, loaded, conformal=True), tmp_path / "diagnostics.json")
    written = json.loads(path.read_text(encoding="utf-8"))
    assert {c["name"] for c in written["checks"]} >= {"null_drift", "causal_violations", "lorentzian_pullback"}


def test_unreadable_surfaces(tmp_path: Path, curved_surface: SolutionSurface):
    with pytest.raises(SurfaceFormatError):
        _ = read_surface(tmp_path / "missing.csv")

    foreign = tmp_path / "foreign.csv"
    _ = foreign.write_text("# format=something-else\n# version=1\n", encoding="utf-8")
    with pytest.raises(SurfaceFormatError, match="not a worldsheet-surface file"):
        _ = read_surface(foreign)

    good = write_surface(curved_surface, tmp_path / "surface.csv").read_text(encoding="utf-8")
    truncated = tmp_path / "truncated.csv"
    _ = truncated.write_text("\n".join(good.splitlines()[:-3]) + "\n", encoding="utf-8")
    with pytest.raises(SurfaceFormatError, match="node lines"):
        _ = read_surface(truncated)

    broken = tmp_path / "broken.json"
    _ = broken.write_text("{not json", encoding="utf-8")
    with pytest.raises(SurfaceFormatError, match="invalid JSON"):
        _ = read_surface(broken)

    newer = tmp_path / "newer.json"
    payload = json.loads(write_surface(curved_surface, tmp_path / "s.json").read_text(encoding="utf-8"))
    payload["version"] = 2
    _ = newer.write_text(json.dumps(payload), encoding="utf-8")
    with pytest.raises(SurfaceFormatError, match="unsupported version"):
        _ = read_surface(newer)


def test_study_table(tmp_path: Path):
    rows = [
        {"level": 0, "error": 0.1, "order": ""},
        {"level": 1, "error": 0.025, "order": 2.0},
    ]
    text = write_table(rows, tmp_path / "table.csv").read_text(encoding="utf-8")
    assert text == "level,error,order\n0,0.10000000000000001,\n1,0.025000000000000001,2\n"
