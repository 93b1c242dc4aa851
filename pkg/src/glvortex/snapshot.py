"""Binary snapshot files for complex fields.

Layout: magic b"GLV1", then little-endian 64-bit values n1, n2 (signed
integers), origin (2 doubles), extent (2 doubles), time, eps; then the field
row-major (values[i][j], j fastest) as interleaved (Re, Im) float64 pairs.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .fields import ComplexField, Grid

MAGIC = b"GLV1"
_HEADER = struct.Struct("<qqdddddd")  # n1, n2, origin, extent, time, eps


def write_snapshot(path, field: ComplexField, eps: float) -> None:
    g = field.grid
    header = _HEADER.pack(g.n1, g.n2, g.origin[0], g.origin[1],
                          g.extent[0], g.extent[1], field.time, eps)
    data = np.ascontiguousarray(field.values, dtype="<c16")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(header)
        f.write(data.tobytes())


def read_snapshot(path) -> tuple[ComplexField, float]:
    raw = Path(path).read_bytes()
    if raw[:4] != MAGIC:
        raise ConfigError(f"{path}: not a GLV1 snapshot")
    n1, n2, ox, oy, ex, ey, time, eps = _HEADER.unpack_from(raw, 4)
    body = raw[4 + _HEADER.size:]
    expect = n1 * n2 * 16
    if len(body) != expect:
        raise ConfigError(f"{path}: payload size {len(body)} != {expect}")
    values = np.frombuffer(body, dtype="<c16").reshape(n1, n2)
    grid = Grid(origin=(ox, oy), extent=(ex, ey), n1=int(n1), n2=int(n2))
    return ComplexField(grid, values, time=time), eps
