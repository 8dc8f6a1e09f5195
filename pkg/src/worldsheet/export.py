"""
Artifact writers and the surface reader.

Surfaces are written in increasing-t order whatever the solve direction, one
line (CSV) or one nested list entry (JSON) per node, floats at 17 significant
digits so that a re-read surface is bit-identical. See docs/formats.md.
"""

from __future__ import annotations

import csv
import io
import json
import logging
from collections.abc import Iterator, Mapping, Sequence
from pathlib import Path
from typing import Any

import cattrs
import numpy as np

from ._types import FloatArray, StrPath
from .char_solver import SolutionSurface, StripRecord
from .converters import dumps, get_converter
from .diagnostics import Check, DiagnosticsSummary
from .enums import ExportFormat
from .exceptions import SurfaceFormatError

logger = logging.getLogger(__name__)

SURFACE_FORMAT = "worldsheet-surface"
SURFACE_VERSION = 1
FLOAT_FORMAT = ".17g"

_converter = get_converter()


def _fmt(value: float) -> str:
    return format(float(value), FLOAT_FORMAT)


def _ordered(s: SolutionSurface) -> tuple[FloatArray, ...]:
    """(t, y, u, v, valid) with rows sorted by increasing t."""
    arrays = (s.t, s.y, s.u, s.v, s.valid)
    if s.time_orientation < 0:
        return tuple(a[::-1] for a in arrays)
    return arrays


def _header(s: SolutionSurface) -> dict[str, Any]:
    return {
        "format": SURFACE_FORMAT,
        "version": SURFACE_VERSION,
        "period": s.period,
        "h": s.h,
        "scale": s.scale,
        "time_orientation": s.time_orientation,
        "rows": s.n_rows,
        "nodes": s.n_nodes,
        "dimension": s.dimension,
        "winding": [float(w) for w in s.winding],
    }


def surface_columns(dimension: int) -> list[str]:
    """
    ```pycon
    >>> surface_columns(2)
    ['row', 'column', 't', 'x', 'valid', 'y0', 'y1', 'u0', 'u1', 'v0', 'v1']

    ```
    """
    fields = [f"{name}{i}" for name in ("y", "u", "v") for i in range(dimension)]
    return ["row", "column", "t", "x", "valid", *fields]


def surface_csv(s: SolutionSurface) -> str:
    t, y, u, v, valid = _ordered(s)
    buf = io.StringIO()
    head = _header(s)
    for key, value in head.items():
        text = ";".join(_fmt(w) for w in value) if key == "winding" else (
            _fmt(value) if isinstance(value, float) else str(value)
        )
        buf.write(f"# {key}={text}\n")
    for record in s.strips:
        buf.write(f"# strip={json.dumps(_converter.unstructure(record), sort_keys=True)}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(surface_columns(s.dimension))
    x = s.x
    for k in range(s.n_rows):
        for j in range(s.n_nodes):
            writer.writerow(
                [
                    k,
                    j,
                    _fmt(t[k]),
                    _fmt(x[j]),
                    int(bool(valid[k, j])),
                    *(_fmt(c) for c in y[k, j]),
                    *(_fmt(c) for c in u[k, j]),
                    *(_fmt(c) for c in v[k, j]),
                ]
            )
    return buf.getvalue()


def surface_payload(s: SolutionSurface) -> dict[str, Any]:
    t, y, u, v, valid = _ordered(s)
    return {
        **_header(s),
        "t": _converter.unstructure(t),
        "y": _converter.unstructure(y),
        "u": _converter.unstructure(u),
        "v": _converter.unstructure(v),
        "valid": valid.astype(bool).tolist(),
        "strips": [_converter.unstructure(r) for r in s.strips],
    }


def write_surface(
    s: SolutionSurface, path: StrPath, fmt: ExportFormat | None = None
) -> Path:
    out = Path(path)
    fmt = fmt or ExportFormat.from_path(out)
    out.parent.mkdir(parents=True, exist_ok=True)
    text = surface_csv(s) if fmt is ExportFormat.CSV else dumps(surface_payload(s))
    out.write_text(text, encoding="utf-8")
    logger.info(f"Wrote {s.n_rows}x{s.n_nodes} surface to {out}")
    return out


def _from_ordered(
    head: Mapping[str, Any],
    t: FloatArray,
    y: FloatArray,
    u: FloatArray,
    v: FloatArray,
    valid: np.ndarray,
    strips: Sequence[StripRecord],
) -> SolutionSurface:
    orientation = int(head["time_orientation"])
    if orientation < 0:
        t, y, u, v, valid = (a[::-1] for a in (t, y, u, v, valid))
    return SolutionSurface(
        period=float(head["period"]),
        h=float(head["h"]),
        t=np.ascontiguousarray(t),
        y=np.ascontiguousarray(y),
        u=np.ascontiguousarray(u),
        v=np.ascontiguousarray(v),
        valid=np.ascontiguousarray(valid),
        winding=np.asarray(head["winding"], dtype=np.float64),
        scale=float(head["scale"]),
        time_orientation=orientation,
        strips=tuple(strips),
    )


def _check_header(path: str, head: Mapping[str, Any]) -> None:
    if head.get("format") != SURFACE_FORMAT:
        raise SurfaceFormatError(path, f"not a {SURFACE_FORMAT} file")
    if int(head.get("version", -1)) != SURFACE_VERSION:
        raise SurfaceFormatError(path, f"unsupported version {head.get('version')!r}")
    missing = {"period", "h", "scale", "time_orientation", "rows", "nodes", "dimension", "winding"} - set(head)
    if missing:
        raise SurfaceFormatError(path, f"missing header fields {sorted(missing)}")


def _structure_strips(path: str, raw: Sequence[Any]) -> list[StripRecord]:
    try:
        return [_converter.structure(r, StripRecord) for r in raw]
    except (cattrs.BaseValidationError, KeyError, TypeError, ValueError) as e:
        raise SurfaceFormatError(path, f"bad strip record: {e}") from None


def _comment_lines(lines: Iterator[str]) -> tuple[dict[str, Any], list[Any], list[str]]:
    head: dict[str, Any] = {}
    strips: list[Any] = []
    body: list[str] = []
    for line in lines:
        if line.startswith("#"):
            key, _, value = line[1:].strip().partition("=")
            if key == "strip":
                strips.append(json.loads(value))
            elif key == "winding":
                head[key] = [float(w) for w in value.split(";") if w]
            else:
                head[key] = value
        elif line.strip():
            body.append(line)
    if "format" in head:
        head["version"] = int(head.get("version", -1))
    return head, strips, body


def _read_csv(path: str, text: str) -> SolutionSurface:
    try:
        head, raw_strips, body = _comment_lines(iter(text.splitlines()))
    except (ValueError, json.JSONDecodeError) as e:
        raise SurfaceFormatError(path, f"bad header: {e}") from None
    _check_header(path, head)
    rows, nodes, dim = int(head["rows"]), int(head["nodes"]), int(head["dimension"])
    reader = csv.reader(body)
    columns = next(reader, None)
    if columns != surface_columns(dim):
        raise SurfaceFormatError(path, "unexpected column header")
    try:
        data = np.array([[float(c) for c in r] for r in reader], dtype=np.float64)
    except ValueError as e:
        raise SurfaceFormatError(path, str(e)) from None
    if data.shape != (rows * nodes, 5 + 3 * dim):
        raise SurfaceFormatError(path, f"expected {rows * nodes} node lines, found {data.shape[0]}")
    grid = data.reshape(rows, nodes, -1)
    t = grid[:, 0, 2].copy()
    valid = grid[:, :, 4] != 0.0
    y = grid[:, :, 5 : 5 + dim]
    u = grid[:, :, 5 + dim : 5 + 2 * dim]
    v = grid[:, :, 5 + 2 * dim :]
    return _from_ordered(head, t, y, u, v, valid, _structure_strips(path, raw_strips))


def _read_json(path: str, text: str) -> SolutionSurface:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as e:
        raise SurfaceFormatError(path, f"invalid JSON: {e}") from None
    if not isinstance(payload, dict):
        raise SurfaceFormatError(path, "top level must be an object")
    _check_header(path, payload)

    def grid(name: str) -> FloatArray:
        try:
            return _converter.structure(payload[name], np.ndarray)
        except (KeyError, TypeError) as e:
            raise SurfaceFormatError(path, f"field {name!r}: {e}") from None

    shape = (int(payload["rows"]), int(payload["nodes"]), int(payload["dimension"]))
    y, u, v = grid("y"), grid("u"), grid("v")
    if y.shape != shape or u.shape != shape or v.shape != shape:
        raise SurfaceFormatError(path, f"node arrays do not have shape {shape}")
    valid = np.asarray(payload.get("valid"), dtype=bool)
    if valid.shape != shape[:2]:
        raise SurfaceFormatError(path, "validity mask does not match the node arrays")
    return _from_ordered(payload, grid("t"), y, u, v, valid, _structure_strips(path, payload.get("strips", [])))


def read_surface(path: StrPath) -> SolutionSurface:
    """Inverse of `write_surface`; the format follows the file suffix."""
    source = str(path)
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SurfaceFormatError(source, e.strerror or str(e)) from None
    if ExportFormat.from_path(source) is ExportFormat.JSON:
        return _read_json(source, text)
    return _read_csv(source, text)


def _check_payload(c: Check) -> dict[str, Any]:
    return {
        "name": c.name,
        "value": _converter.unstructure(c.value),
        "threshold": _converter.unstructure(c.threshold),
        "passed": c.passed,
        "severity": str(c.severity),
        "status": str(c.status),
    }


def diagnostics_payload(summary: DiagnosticsSummary) -> dict[str, Any]:
    return {
        "status": str(summary.status),
        "passed": summary.passed,
        "area": _converter.unstructure(summary.area),
        "energy": _converter.unstructure(summary.energy),
        "degenerate_nodes": summary.degenerate_nodes,
        "checks": [_check_payload(c) for c in summary.checks],
    }


def write_json(payload: Any, path: StrPath) -> Path:
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(dumps(_converter.unstructure(payload)), encoding="utf-8")
    return out


def write_diagnostics(summary: DiagnosticsSummary, path: StrPath) -> Path:
    return write_json(diagnostics_payload(summary), path)


def write_table(
    rows: Sequence[Mapping[str, Any]], path: StrPath
) -> Path:
    """Delimited study table; the first row fixes the column order."""
    out = Path(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    columns = list(rows[0]) if rows else []
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow(
            [_fmt(row[c]) if isinstance(row[c], float) else row[c] for c in columns]
        )
    out.write_text(buf.getvalue(), encoding="utf-8")
    return out


if __name__ == "__main__":
    import doctest

    _ = doctest.testmod()
