"""On-disk formats: binary state snapshots and canonical JSON/NDJSON.

Snapshot layout (little-endian, no padding):

    header  <4sIIIIddId : magic b"CTNS", version, flags, nx, ny, lx, ly,
                          field_count, time
    accums  <5d         : running dissipation integrals (zeros when the
                          source state carried none; flags bit 1 tells)
    fields  field_count row-major float64 arrays: n, c, u_x, u_y

Flags: bit 0 set for wall-bounded (square) scalar mode, bit 1 set when the
accumulator block is meaningful.  A 64 x 64 snapshot is 131160 bytes.

JSON output is canonical: keys sorted, compact separators for NDJSON rows,
two-space indent for manifests; identical inputs produce identical bytes.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import ConfigurationError
from .fields import (
    SQUARE_NEUMANN,
    TORUS,
    DissipationAccumulators,
    ScalarField,
    State,
    VectorField,
    make_grid,
)

MAGIC = b"CTNS"
VERSION = 1
_HEADER = struct.Struct("<4sIIIIddId")
_ACCUMS = struct.Struct("<5d")
_FLAG_SQUARE = 1
_FLAG_ACCUM = 2
FIELD_COUNT = 4


def snapshot_size(nx: int, ny: int) -> int:
    return _HEADER.size + _ACCUMS.size + FIELD_COUNT * nx * ny * 8


def write_snapshot(path, state: State) -> int:
    """Serialize a full state; returns the byte count written."""
    g = state.grid
    flags = 0
    if g.bc == SQUARE_NEUMANN:
        flags |= _FLAG_SQUARE
    acc = state.accum
    if acc is not None:
        flags |= _FLAG_ACCUM
    else:
        acc = DissipationAccumulators()
    header = _HEADER.pack(MAGIC, VERSION, flags, g.nx, g.ny, g.lx, g.ly,
                          FIELD_COUNT, state.t)
    accums = _ACCUMS.pack(acc.fisher, acc.enstrophy, acc.hessian,
                          acc.quartic, acc.cross)
    payload = b"".join(
        np.ascontiguousarray(a, dtype="<f8").tobytes()
        for a in (state.n.values, state.c.values, state.u.x, state.u.y))
    blob = header + accums + payload
    Path(path).write_bytes(blob)
    return len(blob)


def read_snapshot(path) -> State:
    p = Path(path)
    blob = p.read_bytes()
    if len(blob) < _HEADER.size:
        raise ConfigurationError(f"{p}: truncated snapshot header "
                                 f"({len(blob)} bytes)")
    magic, version, flags, nx, ny, lx, ly, field_count, t = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise ConfigurationError(f"{p}: bad magic {magic!r}, not a snapshot file")
    if version != VERSION:
        raise ConfigurationError(f"{p}: unsupported snapshot version {version}")
    if field_count != FIELD_COUNT:
        raise ConfigurationError(f"{p}: snapshot holds {field_count} fields, "
                                 f"expected {FIELD_COUNT}")
    expected = snapshot_size(nx, ny)
    if len(blob) != expected:
        raise ConfigurationError(f"{p}: snapshot is {len(blob)} bytes, "
                                 f"expected {expected} for a {nx} x {ny} grid")
    bc = SQUARE_NEUMANN if flags & _FLAG_SQUARE else TORUS
    grid = make_grid(nx, ny, lx, ly, bc)
    vals = _ACCUMS.unpack_from(blob, _HEADER.size)
    accum = DissipationAccumulators(*vals) if flags & _FLAG_ACCUM else None
    offset = _HEADER.size + _ACCUMS.size
    count = nx * ny
    fields = []
    for _ in range(FIELD_COUNT):
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        fields.append(arr.reshape(nx, ny).astype(np.float64))
        offset += count * 8
    n, c, ux, uy = fields
    return State(ScalarField(grid, n), ScalarField(grid, c),
                 VectorField(grid, ux, uy), t, accum)


def snapshot_path(directory, index: int) -> Path:
    return Path(directory) / f"state_{index:06d}.ctns"


# -- canonical JSON ------------------------------------------------------------


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    return obj


def json_line(record: dict) -> str:
    """One canonical NDJSON row (sorted keys, compact separators)."""
    return json.dumps(_jsonable(record), sort_keys=True, separators=(",", ":"),
                      allow_nan=True)


def write_ndjson(path, records) -> int:
    """Write one JSON object per line; returns the row count."""
    count = 0
    with open(path, "w") as fh:
        for rec in records:
            fh.write(json_line(rec))
            fh.write("\n")
            count += 1
    return count


def read_ndjson(path) -> list:
    out = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out


def write_json(path, obj) -> None:
    """Canonical manifest writer: sorted keys, two-space indent."""
    text = json.dumps(_jsonable(obj), sort_keys=True, indent=2, allow_nan=True)
    Path(path).write_text(text + "\n")


def trajectory_records(traj) -> list:
    """Flatten a trajectory's scalar series into one dict per recorded time."""
    keys = sorted(traj.series)
    length = len(traj.series["t"])
    return [{k: float(traj.series[k][i]) for k in keys} for i in range(length)]
