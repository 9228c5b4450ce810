"""Readers for the solver's documented artifact formats.

Implemented from the published file-format contract alone (CSV schema,
snapshot binary layout, JSON sidecars); this package never imports the
solver.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

RUN_COLUMNS = ("t", "mass", "energy_hs", "entropy", "dissipation",
               "support_radius", "min_u", "max_u")
SNAPSHOT_MAGIC = b"FTHN"


class SchemaError(ValueError):
    """Input file does not match the documented schema."""


def read_run_csv(path) -> dict[str, np.ndarray]:
    """Parse a run time series; names every missing column explicitly."""
    lines = Path(path).read_text().strip().splitlines()
    idx = 0
    meta = {}
    while idx < len(lines) and lines[idx].startswith("#"):
        body = lines[idx][1:].strip()
        if "=" in body:
            k, _, v = body.partition("=")
            meta[k.strip()] = v.strip()
        idx += 1
    if idx >= len(lines):
        raise SchemaError(f"{path}: empty input, no header row")
    header = [c.strip() for c in lines[idx].split(",")]
    missing = [c for c in RUN_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing}")
    rows = [line.split(",") for line in lines[idx + 1:] if line.strip()]
    if not rows:
        raise SchemaError(f"{path}: empty input, header but no data rows")
    array = np.asarray(rows, dtype=float)
    out = {name: array[:, header.index(name)] for name in header}
    out["_meta"] = meta
    return out


def read_snapshot(path) -> tuple[dict, np.ndarray]:
    """Decode one binary snapshot into its geometry header and coefficients."""
    raw = Path(path).read_bytes()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise SchemaError(f"{path}: bad magic, not a snapshot file")
    version, dim = struct.unpack_from("<II", raw, 4)
    if version != 1:
        raise SchemaError(f"{path}: unsupported snapshot version {version}")
    off = 12
    lengths, modes, quads = [], [], []
    for _ in range(dim):
        L, n, m = struct.unpack_from("<dII", raw, off)
        lengths.append(L)
        modes.append(n)
        quads.append(m)
        off += 16
    coeffs = np.frombuffer(raw, dtype="<f8", offset=off).reshape(modes).copy()
    geometry = {"dimension": dim, "lengths": lengths, "modes": modes,
                "quad_points": quads}
    return geometry, coeffs


def read_snapshot_index(directory) -> list[dict]:
    index = Path(directory) / "index.json"
    if not index.exists():
        raise SchemaError(f"no snapshot index at {index}")
    payload = json.loads(index.read_text())
    snaps = payload.get("snapshots", [])
    if not snaps:
        raise SchemaError(f"{index}: no snapshots listed")
    return snaps


def evaluate_snapshot(geometry: dict, coeffs: np.ndarray,
                      points_per_axis: int = 512) -> tuple[list[np.ndarray], np.ndarray]:
    """Nodal values of the cosine series on a uniform plotting grid.

    The basis is orthonormal per axis: phi_0 = 1/sqrt(L),
    phi_k = sqrt(2/L) cos(k pi x / L).
    """
    vals = np.asarray(coeffs, dtype=float)
    axes = []
    for i in range(geometry["dimension"]):
        L = geometry["lengths"][i]
        x = np.linspace(0.0, L, points_per_axis)
        k = np.arange(geometry["modes"][i])
        mat = np.cos(np.outer(k, np.pi * x / L)) * np.sqrt(2.0 / L)
        mat[0, :] = 1.0 / np.sqrt(L)
        vals = np.moveaxis(np.tensordot(vals, mat, axes=([i], [0])), -1, i)
        axes.append(x)
    return axes, vals


def read_sweep(path) -> list[dict]:
    """Rows of a sweep summary from sweep.json or sweep.csv."""
    path = Path(path)
    if path.suffix == ".json":
        rows = json.loads(path.read_text()).get("rows", [])
        if not rows:
            raise SchemaError(f"{path}: no sweep rows")
        return rows
    lines = path.read_text().strip().splitlines()
    lines = [ln for ln in lines if not ln.startswith("#")]
    if len(lines) < 2:
        raise SchemaError(f"{path}: empty input, no sweep rows")
    header = lines[0].split(",")
    rows = []
    for line in lines[1:]:
        row = {}
        for key, tok in zip(header, line.split(",")):
            try:
                row[key] = float(tok)
            except ValueError:
                row[key] = tok
        rows.append(row)
    return rows
