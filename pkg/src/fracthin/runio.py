"""On-disk formats: run CSV, binary snapshots with geometry headers, JSON reports.

Formats are bit-stable so reruns with identical configs produce identical
bytes.  The CSV starts with a provenance comment line carrying the config
hash, then the fixed header row.  Snapshots are little-endian: magic 'FTHN',
version, dimension, per-axis (length f64, modes u32, quad u32), then the flat
float64 coefficient array in C order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .solver import RunRecord, SnapshotMeta
from .spectral import DomainGeometry

SNAPSHOT_MAGIC = b"FTHN"
SNAPSHOT_VERSION = 1

CSV_COLUMNS = ("t", "mass", "energy_hs", "entropy", "dissipation",
               "support_radius", "min_u", "max_u")


def format_float(x: float) -> str:
    return f"{x:.17g}"


def write_run_csv(path, record: RunRecord, config_hash: str) -> None:
    rows = record.rows()
    lines = [f"# config_hash={config_hash}", ",".join(CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(format_float(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_run_csv(path) -> dict[str, np.ndarray]:
    """Parse the documented schema; raises on missing columns."""
    text = Path(path).read_text().strip().splitlines()
    meta = {}
    idx = 0
    while idx < len(text) and text[idx].startswith("#"):
        line = text[idx][1:].strip()
        if "=" in line:
            key, _, val = line.partition("=")
            meta[key.strip()] = val.strip()
        idx += 1
    if idx >= len(text):
        raise ValueError(f"{path}: empty time-series file")
    header = [c.strip() for c in text[idx].split(",")]
    missing = [c for c in CSV_COLUMNS if c not in header]
    if missing:
        raise ValueError(f"{path}: missing columns {missing}")
    data = [[] for _ in header]
    for line in text[idx + 1:]:
        if not line.strip():
            continue
        for slot, tok in zip(data, line.split(",")):
            slot.append(float(tok))
    out = {name: np.asarray(col) for name, col in zip(header, data)}
    out["_meta"] = meta
    return out


def write_snapshot(path, geometry: DomainGeometry, coeffs: np.ndarray) -> None:
    with open(path, "wb") as fh:
        fh.write(SNAPSHOT_MAGIC)
        fh.write(struct.pack("<II", SNAPSHOT_VERSION, geometry.dimension))
        for L, n, m in zip(geometry.lengths, geometry.modes, geometry.quad_points):
            fh.write(struct.pack("<dII", L, n, m))
        fh.write(np.ascontiguousarray(coeffs, dtype="<f8").tobytes())


def read_snapshot(path) -> tuple[DomainGeometry, np.ndarray]:
    raw = Path(path).read_bytes()
    if raw[:4] != SNAPSHOT_MAGIC:
        raise ValueError(f"{path}: not a snapshot file")
    version, dim = struct.unpack_from("<II", raw, 4)
    if version != SNAPSHOT_VERSION:
        raise ValueError(f"{path}: unsupported snapshot version {version}")
    off = 12
    lengths, modes, quads = [], [], []
    for _ in range(dim):
        L, n, m = struct.unpack_from("<dII", raw, off)
        lengths.append(L)
        modes.append(n)
        quads.append(m)
        off += 16
    geometry = DomainGeometry(tuple(lengths), tuple(modes), tuple(quads))
    coeffs = np.frombuffer(raw, dtype="<f8", offset=off).reshape(modes).copy()
    return geometry, coeffs


def snapshot_sink(directory, geometry: DomainGeometry, config_hash: str):
    """Returns a sink callable for the solver plus the list it fills."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    metas: list[dict] = []

    def sink(meta: SnapshotMeta, coeffs: np.ndarray) -> str:
        name = f"snap_{meta.index:05d}.bin"
        write_snapshot(directory / name, geometry, coeffs)
        record = {
            "index": meta.index, "t": meta.t, "mass": meta.mass,
            "energy": meta.energy, "entropy": meta.entropy,
            "min_u": meta.min_u, "max_u": meta.max_u,
            "file": name, "config_hash": config_hash,
        }
        (directory / f"snap_{meta.index:05d}.json").write_text(
            json.dumps(record, sort_keys=True, indent=1) + "\n")
        metas.append(record)
        return name

    return sink, metas


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, sort_keys=True, indent=1,
                                     allow_nan=True) + "\n")
