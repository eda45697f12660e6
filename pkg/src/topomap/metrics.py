"""Neighborhood-preservation and quantization quality measures.

Trustworthiness penalizes latent-space neighbors that are not data-space
neighbors; continuity penalizes data-space neighbors lost in the latent
space. Both use squared-Euclidean neighbor ranks with ties broken toward
the smaller index, which keeps the scores deterministic for
node-constrained embeddings with many coincident positions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .core import as_points


@dataclass
class RankTable:
    """ranks[i, j] = rank of j among all points != i by distance from i
    (nearest = 1). Diagonal entries are unused and set to 0."""

    ranks: np.ndarray  # (N, N) int32


def rank_table(points) -> RankTable:
    x = as_points(points)
    n = x.shape[0]
    if n < 2:
        raise ValueError("rank_table needs at least two points")
    d2 = backends.pairwise_sq_dists(x, x)
    np.fill_diagonal(d2, np.inf)
    order = np.argsort(d2, axis=1, kind="stable")
    ranks = np.empty((n, n), dtype=np.int32)
    rows = np.arange(n)[:, None]
    ranks[rows, order] = np.arange(1, n + 1, dtype=np.int32)[None, :]
    np.fill_diagonal(ranks, 0)
    return RankTable(ranks)


def _check_k(k, n):
    k = int(k)
    if not 1 <= k < n / 2:
        raise ValueError(f"k must satisfy 1 <= k < N/2 (N={n})")
    return k


def _knn_mask(ranks, k):
    return (ranks >= 1) & (ranks <= k)


def trustworthiness(data, latent, k: int) -> float:
    """1 minus the normalized rank penalty of latent k-NN members that are
    not data k-NN members; 1.0 means no false latent neighbors."""
    x = as_points(data)
    y = as_points(latent)
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("data and latent must have the same number of rows")
    k = _check_k(k, n)
    rd = rank_table(x).ranks
    rl = rank_table(y).ranks
    intruders = _knn_mask(rl, k) & ~_knn_mask(rd, k)
    penalty = int((rd[intruders] - k).sum())
    return 1.0 - (2.0 * penalty) / (n * k * (2 * n - 3 * k - 1))


def continuity(data, latent, k: int) -> float:
    """Counterpart of trustworthiness: penalizes data k-NN members missing
    from the latent k-NN, using latent-space ranks."""
    x = as_points(data)
    y = as_points(latent)
    n = x.shape[0]
    if y.shape[0] != n:
        raise ValueError("data and latent must have the same number of rows")
    k = _check_k(k, n)
    rd = rank_table(x).ranks
    rl = rank_table(y).ranks
    missing = _knn_mask(rd, k) & ~_knn_mask(rl, k)
    penalty = int((rl[missing] - k).sum())
    return 1.0 - (2.0 * penalty) / (n * k * (2 * n - 3 * k - 1))


def quantization_error(points, refs) -> float:
    """Mean squared Euclidean distance from each point to its best matching
    unit. (The squared convention reproduces the reference results; the
    plain-distance variant runs an order of magnitude larger.)"""
    x = as_points(points)
    refs = np.asarray(refs, dtype=np.float64)
    if refs.ndim != 2 or refs.shape[0] < 1:
        raise ValueError("refs must be a non-empty matrix")
    _, dmin = backends.nearest(x, refs)
    return float(dmin.mean())


def tuning_score(tw: float, cn: float) -> float:
    """Arithmetic mean of trustworthiness and continuity."""
    tw = float(tw)
    cn = float(cn)
    if not (0.0 <= tw <= 1.0 and 0.0 <= cn <= 1.0):
        raise ValueError("scores must lie in [0, 1]")
    return (tw + cn) / 2.0
