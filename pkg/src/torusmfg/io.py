"""Field CSV files, JSON reports and run manifests.

Field files have a header ``x1[,x2[,x3]],value`` and one row per node in
row-major order, every number written with 17 significant digits so that
reading a file back reproduces the array bit for bit.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .grid import Array, GridSpec

FMT = "%.17g"


def atomic_write(path: Path, data: str | bytes) -> None:
    """Write to a sibling temporary file, then rename over ``path``."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.tmp")
    mode = "wb" if isinstance(data, bytes) else "w"
    with open(tmp, mode) as fh:
        fh.write(data)
    os.replace(tmp, path)


def format_field(f: Array, g: GridSpec) -> str:
    f = np.asarray(f, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"field shape {f.shape} does not match grid {g.shape}")
    coords = g.coordinates().reshape(g.dim, -1)
    header = ",".join([f"x{k + 1}" for k in range(g.dim)] + ["value"])
    rows = np.column_stack([coords.T, f.ravel()])
    body = "\n".join(",".join(FMT % v for v in row) for row in rows)
    return header + "\n" + body + "\n"


def write_field(path: Path, f: Array, g: GridSpec) -> None:
    atomic_write(path, format_field(f, g))


def read_field(path: Path, g: GridSpec) -> Array:
    """Read a field file written by :func:`write_field` and check it against ``g``."""
    path = Path(path)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        expected = [f"x{k + 1}" for k in range(g.dim)] + ["value"]
        if header != expected:
            raise ValueError(f"{path}: header {header} does not match grid (expected {expected})")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape != (g.size, g.dim + 1):
        raise ValueError(f"{path}: {data.shape[0]} rows, grid has {g.size} nodes")
    coords = g.coordinates().reshape(g.dim, -1).T
    if not np.allclose(data[:, : g.dim], coords, atol=1e-12):
        raise ValueError(f"{path}: node coordinates do not match the grid")
    values = data[:, -1]
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{path}: non-finite values")
    return values.reshape(g.shape)


def dump_json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def sha256_file(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
