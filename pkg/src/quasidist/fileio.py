"""Deterministic CSV/JSON serialization for states, densities, and fields.

Numbers are printed with 17 significant digits, which round-trips IEEE
doubles exactly, so identical inputs produce byte-identical files and a
save/load cycle reproduces every value bit for bit.  JSON is rendered by
hand with sorted keys and two-space indentation for the same reason: the
files serve as golden artifacts in regression tests.

Formats:
    state CSV     header ``q,re,im`` or ``p,re,im``, one row per grid point
    density CSV   header ``i,j,re,im`` plus a JSON sidecar with the grid
    field CSV     header ``q,p,re,im`` (q outermost) plus a JSON sidecar
"""
from __future__ import annotations

import csv
import math
from pathlib import Path

import numpy as np

from .distributions import ChiField, DistributionField
from .errors import InputError
from .grids import DensityMatrix, MomentumState, PositionState, UniformGrid


def format_float(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        raise InputError(f"cannot serialize non-finite value {x!r}")
    return format(x, ".17g")


def render_json(obj) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, 17-digit floats."""
    return _render(obj, 0) + "\n"


def _render(obj, depth):
    pad = "  " * depth
    inner = "  " * (depth + 1)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        keys = sorted(obj)
        if any(not isinstance(k, str) for k in keys):
            raise InputError("JSON object keys must be strings")
        rows = [f'{inner}"{_escape(k)}": {_render(obj[k], depth + 1)}' for k in keys]
        return "{\n" + ",\n".join(rows) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        rows = [f"{inner}{_render(v, depth + 1)}" for v in obj]
        return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if obj is None:
        return "null"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return f'"{_escape(obj)}"'
    raise InputError(f"cannot serialize {type(obj).__name__} to JSON")


def _escape(text):
    out = []
    for ch in text:
        if ch == '"':
            out.append('\\"')
        elif ch == "\\":
            out.append("\\\\")
        elif ord(ch) < 0x20:
            out.append(f"\\u{ord(ch):04x}")
        else:
            out.append(ch)
    return "".join(out)


def write_json(path, obj):
    Path(path).write_text(render_json(obj), encoding="utf-8")


def load_json(path):
    import json

    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"{path}: cannot read ({exc})") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc})") from exc


def _sidecar(path):
    return Path(path).with_suffix(".json")


def _grid_dict(grid):
    return {"count": grid.count, "minimum": grid.minimum, "step": grid.step}


def _grid_from_dict(data, where):
    try:
        return UniformGrid(int(data["count"]), float(data["minimum"]),
                           float(data["step"]))
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{where}: bad grid metadata ({exc})") from exc


def _parse_float(text, path, line):
    try:
        return float(text)
    except ValueError:
        raise InputError(f"{path}, line {line}: not a number: {text!r}")


def _read_rows(path, header):
    try:
        raw = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    rows = list(csv.reader(raw.splitlines()))
    if not rows or rows[0] != header:
        found = ",".join(rows[0]) if rows else "empty file"
        raise InputError(
            f"{path}: expected header {','.join(header)!r}, found {found!r}")
    width = len(header)
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != width:
            raise InputError(f"{path}, line {line}: expected {width} fields, "
                             f"got {len(row)}")
    return rows[1:]


def _check_uniform(coords, path):
    coords = np.asarray(coords, dtype=float)
    if coords.size < 8:
        raise InputError(f"{path}: needs at least 8 grid rows")
    step = (coords[-1] - coords[0]) / (coords.size - 1)
    if not step > 0:
        raise InputError(f"{path}: coordinates must increase")
    model = coords[0] + step * np.arange(coords.size)
    tol = 1e-9 * max(1.0, float(np.abs(coords).max()))
    if np.abs(coords - model).max() > tol:
        raise InputError(f"{path}: coordinates are not uniformly spaced")
    return UniformGrid(int(coords.size), float(coords[0]), float(step))


def save_state(path, state):
    """Write a wavefunction as CSV; the header names the representation."""
    if isinstance(state, PositionState):
        label = "q"
    elif isinstance(state, MomentumState):
        label = "p"
    else:
        raise InputError("save_state expects a PositionState or MomentumState")
    lines = [f"{label},re,im"]
    for coord, value in zip(state.grid.points(), state.values):
        lines.append(f"{format_float(coord)},{format_float(value.real)},"
                     f"{format_float(value.imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_state(path, hbar=1.0):
    """Read a state CSV; the header decides position versus momentum."""
    raw = Path(path).read_text(encoding="utf-8") if Path(path).exists() else None
    if raw is None:
        raise InputError(f"state file not found: {path}")
    first = raw.splitlines()[0] if raw.splitlines() else ""
    if first == "q,re,im":
        label, cls = "q", PositionState
    elif first == "p,re,im":
        label, cls = "p", MomentumState
    else:
        raise InputError(
            f"{path}: expected header 'q,re,im' or 'p,re,im', found {first!r}")
    rows = _read_rows(path, [label, "re", "im"])
    coords, values = [], []
    for line, row in enumerate(rows, start=2):
        coords.append(_parse_float(row[0], path, line))
        values.append(complex(_parse_float(row[1], path, line),
                              _parse_float(row[2], path, line)))
    grid = _check_uniform(coords, path)
    return cls(grid, np.asarray(values), hbar=hbar)


def save_density(path, rho):
    """Write a density matrix as index CSV plus a grid-metadata sidecar."""
    if not isinstance(rho, DensityMatrix):
        raise InputError("save_density expects a DensityMatrix")
    n = rho.grid.count
    lines = ["i,j,re,im"]
    for i in range(n):
        row = rho.entries[i]
        for j in range(n):
            lines.append(f"{i},{j},{format_float(row[j].real)},"
                         f"{format_float(row[j].imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = _grid_dict(rho.grid)
    meta["hbar"] = rho.hbar
    write_json(_sidecar(path), meta)


def load_density(path):
    meta = load_json(_sidecar(path))
    grid = _grid_from_dict(meta, str(_sidecar(path)))
    try:
        hbar = float(meta["hbar"])
    except (KeyError, TypeError, ValueError):
        raise InputError(f"{_sidecar(path)}: missing or bad hbar")
    rows = _read_rows(path, ["i", "j", "re", "im"])
    n = grid.count
    if len(rows) != n * n:
        raise InputError(f"{path}: expected {n * n} rows, found {len(rows)}")
    entries = np.zeros((n, n), dtype=complex)
    seen = np.zeros((n, n), dtype=bool)
    for line, row in enumerate(rows, start=2):
        try:
            i, j = int(row[0]), int(row[1])
        except ValueError:
            raise InputError(f"{path}, line {line}: bad index pair")
        if not (0 <= i < n and 0 <= j < n):
            raise InputError(f"{path}, line {line}: index ({i}, {j}) out of range")
        if seen[i, j]:
            raise InputError(f"{path}, line {line}: duplicate entry ({i}, {j})")
        seen[i, j] = True
        entries[i, j] = complex(_parse_float(row[2], path, line),
                                _parse_float(row[3], path, line))
    if not seen.all():
        raise InputError(f"{path}: missing entries")
    return DensityMatrix(grid, entries, hbar=hbar)


def save_field(path, field, config=None):
    """Write a phase-space field as CSV plus sidecar metadata.

    Distribution fields record their alpha; time-stamped fields record
    their time.  ``config``, when given, is echoed into the sidecar so a
    run can be reproduced from its artifacts alone.
    """
    if isinstance(field, DistributionField):
        extra = {"alpha": field.alpha}
    elif isinstance(field, ChiField):
        extra = {"time": field.time}
    else:
        raise InputError("save_field expects a DistributionField or ChiField")
    q = field.qgrid.points()
    p = field.pgrid.points()
    qtexts = [format_float(v) for v in q]
    ptexts = [format_float(v) for v in p]
    lines = ["q,p,re,im"]
    for i in range(field.qgrid.count):
        row = field.values[i]
        qt = qtexts[i]
        for j in range(field.pgrid.count):
            lines.append(f"{qt},{ptexts[j]},{format_float(row[j].real)},"
                         f"{format_float(row[j].imag)}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    meta = {
        "hbar": field.hbar,
        "qgrid": _grid_dict(field.qgrid),
        "pgrid": _grid_dict(field.pgrid),
    }
    meta.update(extra)
    if config is not None:
        meta["config"] = config
    write_json(_sidecar(path), meta)


def load_field(path):
    """Read a field CSV and its sidecar back into the matching field type."""
    meta = load_json(_sidecar(path))
    where = str(_sidecar(path))
    qgrid = _grid_from_dict(meta.get("qgrid", {}), where)
    pgrid = _grid_from_dict(meta.get("pgrid", {}), where)
    try:
        hbar = float(meta["hbar"])
    except (KeyError, TypeError, ValueError):
        raise InputError(f"{where}: missing or bad hbar")
    rows = _read_rows(path, ["q", "p", "re", "im"])
    nq, npts = qgrid.count, pgrid.count
    if len(rows) != nq * npts:
        raise InputError(f"{path}: expected {nq * npts} rows, found {len(rows)}")
    values = np.zeros((nq, npts), dtype=complex)
    qpts, ppts = qgrid.points(), pgrid.points()
    tol_q = 1e-9 * max(1.0, float(np.abs(qpts).max()))
    tol_p = 1e-9 * max(1.0, float(np.abs(ppts).max()))
    index = 0
    for line, row in enumerate(rows, start=2):
        i, j = divmod(index, npts)
        qv = _parse_float(row[0], path, line)
        pv = _parse_float(row[1], path, line)
        if abs(qv - qpts[i]) > tol_q or abs(pv - ppts[j]) > tol_p:
            raise InputError(
                f"{path}, line {line}: coordinates ({qv}, {pv}) disagree with "
                "the sidecar grids")
        values[i, j] = complex(_parse_float(row[2], path, line),
                               _parse_float(row[3], path, line))
        index += 1
    if "alpha" in meta:
        return DistributionField(qgrid, pgrid, values, float(meta["alpha"]),
                                 hbar=hbar)
    if "time" in meta:
        return ChiField(qgrid, pgrid, values, hbar=hbar, time=float(meta["time"]))
    raise InputError(f"{where}: sidecar names neither alpha nor time")
