"""Lossless CSV for sampled series.

Comma separated, one header row, LF line endings, ``.`` decimal point.
Values are written with 17 significant digits so every float64 reads back
bit for bit.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Mapping

import numpy as np

from .errors import LengthMismatch, ParseError


def format_value(x: float) -> str:
    return format(float(x), ".17g")


def write_series_csv(path, columns: Mapping[str, np.ndarray]) -> Path:
    path = Path(path)
    names = list(columns)
    arrays = [np.asarray(columns[k], dtype=float) for k in names]
    if len({a.shape for a in arrays}) != 1 or arrays[0].ndim != 1:
        raise LengthMismatch("all CSV columns must be 1-D and equally long")
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*arrays):
            writer.writerow([format_value(v) for v in row])
    return path


def read_series_csv(path) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror}") from exc
    if not rows:
        raise ParseError(f"{path} is empty")
    header, body = rows[0], rows[1:]
    try:
        data = np.array([[float(v) for v in row] for row in body], dtype=float)
    except ValueError as exc:
        raise ParseError(f"{path}: non-numeric cell") from exc
    data = data.reshape(len(body), len(header))
    return {name: data[:, i].copy() for i, name in enumerate(header)}


def trajectory_columns(times, q, qd, qdd) -> dict[str, np.ndarray]:
    """``t, q1..qn, v1..vn, a1..an`` columns for a sampled trajectory."""
    cols = {"t": np.asarray(times)}
    for prefix, arr in (("q", q), ("v", qd), ("a", qdd)):
        for j in range(arr.shape[1]):
            cols[f"{prefix}{j + 1}"] = arr[:, j]
    return cols
