"""Shared data containers: datasets, partitions and label files."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class DataError(ValueError):
    """Malformed input data (bad CSV cell, ragged rows, non-finite values)."""

    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)


@dataclass(frozen=True)
class Dataset:
    """Raw N x d sample matrix, one sample per row."""

    X_raw: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X_raw, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DataError(f"expected a non-empty 2-d matrix, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            r, c = np.argwhere(~np.isfinite(X))[0]
            raise DataError("non-finite value", row=int(r), column=int(c))
        object.__setattr__(self, "X_raw", X)

    @property
    def N(self) -> int:
        return self.X_raw.shape[0]

    @property
    def d(self) -> int:
        return self.X_raw.shape[1]


@dataclass
class Partition:
    """Per-sample cluster ids plus the ARTa category that codes each sample."""

    cluster_of: np.ndarray
    category_of: np.ndarray = field(default=None)

    def __post_init__(self):
        self.cluster_of = np.asarray(self.cluster_of, dtype=np.int64)
        if self.category_of is None:
            self.category_of = self.cluster_of.copy()
        else:
            self.category_of = np.asarray(self.category_of, dtype=np.int64)

    @property
    def k_current(self) -> int:
        return len(np.unique(self.cluster_of))


def dense_labels(labels) -> np.ndarray:
    """Map arbitrary integer ids onto 0..k-1, ordered by original id."""
    _, inverse = np.unique(np.asarray(labels), return_inverse=True)
    return inverse.astype(np.int64).reshape(-1)


def merge_id_map(k, i, j) -> np.ndarray:
    """Old-to-new cluster ids after merging i and j into a new last id."""
    keep = [c for c in range(k) if c not in (i, j)]
    out = np.empty(k, dtype=np.int64)
    out[keep] = np.arange(len(keep))
    out[[i, j]] = len(keep)
    return out


def delete_id_map(k, i) -> np.ndarray:
    """Old-to-new ids after deleting id i (i itself maps to -1)."""
    out = np.arange(k, dtype=np.int64)
    out[i + 1:] -= 1
    out[i] = -1
    return out


def dense_relabel(p: Partition) -> Partition:
    return Partition(dense_labels(p.cluster_of), p.category_of.copy())


def load_csv(path, has_header=False) -> Dataset:
    path = Path(path)
    rows = []
    width = None
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        for i, raw in enumerate(reader):
            if has_header and i == 0:
                continue
            if not raw or all(not cell.strip() for cell in raw):
                continue
            if width is None:
                width = len(raw)
            elif len(raw) != width:
                raise DataError(f"{path}: ragged row: expected {width} cells, got {len(raw)}", row=i)
            values = []
            for j, cell in enumerate(raw):
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(f"{path}: cannot parse {cell!r} as a number", row=i, column=j) from None
                if not np.isfinite(v):
                    raise DataError(f"{path}: non-finite value {cell!r}", row=i, column=j)
                values.append(v)
            rows.append(values)
    if not rows:
        raise DataError(f"{path}: no data rows")
    return Dataset(np.array(rows, dtype=float))


def save_csv(path, X, header=None):
    X = np.asarray(X, dtype=float)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        if header is not None:
            writer.writerow(header)
        for row in X:
            writer.writerow([repr(float(v)) for v in row])


def load_labels(path) -> np.ndarray:
    values = []
    with Path(path).open(encoding="utf-8") as fh:
        for i, line in enumerate(fh):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError:
                raise DataError(f"{path}: cannot parse label {line!r}", row=i) from None
    return np.array(values, dtype=np.int64)


def save_labels(path, labels):
    with Path(path).open("w", encoding="utf-8") as fh:
        for v in np.asarray(labels, dtype=np.int64):
            fh.write(f"{int(v)}\n")
