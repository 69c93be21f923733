"""Delimited-text artifacts: nodal snapshots and per-row tables."""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

OUTPUT_DIR_ENV = "PMLCORNER_OUTPUT_DIR"
SENTINEL = 1.0e300


def output_dir(default: str | os.PathLike = "pmlcorner_output") -> Path:
    return Path(os.environ.get(OUTPUT_DIR_ENV, default))


def write_snapshot(path: Path, values: np.ndarray, *, h: float, t: float, step: int, field: str) -> bool:
    """Write a 2D nodal array (rows = y) as text; returns the overflow flag.

    Non-finite or out-of-range values are replaced by +/-SENTINEL.
    """
    values = np.asarray(values, dtype=float)
    bad = ~np.isfinite(values) | (np.abs(values) > SENTINEL)
    overflow = bool(np.any(bad))
    if overflow:
        values = np.where(bad, np.copysign(SENTINEL, np.nan_to_num(values, nan=1.0)), values)
    ny, nx = values.shape
    header = "\n".join([
        f"field={field}",
        f"nx={nx}",
        f"ny={ny}",
        f"h={h!r}",
        f"t={t!r}",
        f"step={step}",
        f"overflow={int(overflow)}",
    ])
    np.savetxt(path, values, fmt="%.17g", delimiter=" ", header=header, comments="# ")
    return overflow


def read_snapshot(path: Path) -> tuple[dict[str, str], np.ndarray]:
    header: dict[str, str] = {}
    with open(path) as fh:
        for line in fh:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].strip().partition("=")
            header[key] = value
    data = np.loadtxt(path, comments="#", ndmin=2)
    nx, ny = int(header["nx"]), int(header["ny"])
    if data.shape != (ny, nx):
        raise ValueError(f"{path}: header advertises {ny}x{nx} values, found {data.shape}")
    return header, data


class RowWriter:
    """CSV writer that flushes after every row, so partial tables survive interruption."""

    def __init__(self, path: Path, columns: list[str]):
        self.path = Path(path)
        self.columns = columns
        self._fh = open(self.path, "w", newline="")
        self._writer = csv.DictWriter(self._fh, fieldnames=columns)
        self._writer.writeheader()
        self._fh.flush()

    def write(self, row: dict) -> None:
        self._writer.writerow({k: _cell(row.get(k)) for k in self.columns})
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return v


def read_table(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))
