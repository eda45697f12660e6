"""Dataset generation, CSV I/O and preprocessing.

CSV dialect: UTF-8, one header row of unique column names, comma
separator, ``.`` decimal point, no quoting of numeric cells, LF or CRLF
line endings. Empty cells and the literal ``NaN`` (case-insensitive)
mark missing values.
"""

from __future__ import annotations

import csv
import math

import numpy as np

from .core import DataError, Dataset


def gen_saddle(n: int = 500, noise_std: float = 0.1, seed: int = 0) -> Dataset:
    """Saddle-manifold sample: x1, x2 ~ Uniform[-1, 1] and
    x3 = x1^2 - x2^2 + Gaussian noise.

    Drawn from numpy's PCG64 generator seeded with ``seed``, sampling the
    columns in the order x1, x2, noise. Used without normalization.
    """
    n = int(n)
    if n < 1:
        raise ValueError("n must be >= 1")
    if noise_std < 0:
        raise ValueError("noise_std must be >= 0")
    rng = np.random.default_rng(seed)
    x1 = rng.uniform(-1.0, 1.0, n)
    x2 = rng.uniform(-1.0, 1.0, n)
    xi = rng.normal(0.0, noise_std, n)
    x3 = x1 * x1 - x2 * x2 + xi
    return Dataset(np.column_stack([x1, x2, x3]), feature_names=("x1", "x2", "x3"))


def _parse_cell(cell, row_idx, col_name):
    cell = cell.strip()
    if cell == "" or cell.lower() == "nan":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise DataError(
            f"non-numeric value {cell!r} in column {col_name!r}, row {row_idx}"
        ) from None


def load_csv(path, label_column: str | None = None) -> Dataset:
    """Read a dataset; the named label column (if any) is mapped to integer
    codes (sorted unique order for string labels)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if len(set(header)) != len(header):
            raise DataError(f"{path}: duplicate column names")
        if label_column is not None and label_column not in header:
            raise DataError(f"{path}: unknown label column {label_column!r}")
        label_idx = header.index(label_column) if label_column is not None else None
        feature_names = tuple(h for i, h in enumerate(header) if i != label_idx)
        rows: list[list[float]] = []
        raw_labels: list[str] = []
        for r, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise DataError(f"{path}: row {r} has {len(row)} cells, expected {len(header)}")
            feats = [
                _parse_cell(c, r, header[i])
                for i, c in enumerate(row)
                if i != label_idx
            ]
            rows.append(feats)
            if label_idx is not None:
                cell = row[label_idx].strip()
                if cell == "":
                    raise DataError(f"{path}: empty label in row {r}")
                raw_labels.append(cell)
    if not rows:
        raise DataError(f"{path}: no data rows")
    labels = None
    if label_idx is not None:
        try:
            labels = np.array([int(c) for c in raw_labels], dtype=np.int64)
        except ValueError:
            codes = {name: i for i, name in enumerate(sorted(set(raw_labels)))}
            labels = np.array([codes[c] for c in raw_labels], dtype=np.int64)
    return Dataset(np.asarray(rows, dtype=np.float64), labels=labels,
                   feature_names=feature_names)


def save_csv(ds: Dataset, path) -> None:
    """Write a dataset in the package CSV dialect; floats use 17 significant
    digits so values round-trip exactly."""
    names = ds.feature_names or tuple(f"x{i + 1}" for i in range(ds.d))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        cols = list(names) + (["label"] if ds.labels is not None else [])
        fh.write(",".join(cols) + "\n")
        for i in range(ds.n):
            cells = ["%.17g" % v for v in ds.points[i]]
            if ds.labels is not None:
                cells.append(str(int(ds.labels[i])))
            fh.write(",".join(cells) + "\n")


def impute_median(ds: Dataset) -> Dataset:
    """Replace every missing entry with the median of its column's observed
    values (even counts average the two middle values)."""
    pts = ds.points.copy()
    for j in range(ds.d):
        col = pts[:, j]
        miss = np.isnan(col)
        if not miss.any():
            continue
        observed = col[~miss]
        if observed.size == 0:
            name = ds.feature_names[j] if ds.feature_names else str(j)
            raise DataError(f"column {name!r} has no observed values")
        col[miss] = np.median(observed)
    return Dataset(pts, labels=ds.labels, feature_names=ds.feature_names)


def standardize(ds: Dataset) -> Dataset:
    """Per-feature (x - mean) / std with the population std (divisor N);
    zero-variance features map to 0."""
    if ds.has_missing:
        raise DataError("impute missing values before standardizing")
    pts = ds.points
    mean = pts.mean(axis=0)
    std = pts.std(axis=0)
    out = np.zeros_like(pts)
    on = std > 0.0
    out[:, on] = (pts[:, on] - mean[on]) / std[on]
    return Dataset(out, labels=ds.labels, feature_names=ds.feature_names)


def scale_by(ds: Dataset, c: float) -> Dataset:
    """Divide every feature by c (> 0)."""
    c = float(c)
    if not c > 0.0:
        raise ValueError("scale divisor must be > 0")
    return Dataset(ds.points / c, labels=ds.labels, feature_names=ds.feature_names)
