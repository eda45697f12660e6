"""PCA-based initialization of reference vectors and assignments.

The basis uses the population covariance (divisor N). Each principal
direction is sign-fixed so that its largest-magnitude component is
positive, and eigenvalue ties break on the lexicographic order of the
sign-fixed vectors; initialization is therefore bit-reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .core import Assignments, LatentGrid, NumericalError


@dataclass
class PcaBasis:
    mean: np.ndarray        # (D,)
    directions: np.ndarray  # (K, D), orthonormal rows
    stds: np.ndarray        # (K,), non-increasing

    @property
    def k(self) -> int:
        return self.directions.shape[0]


def _sign_fix(vec):
    # flip so the largest-magnitude component is positive (argmax ties -> first)
    i = int(np.argmax(np.abs(vec)))
    return -vec if vec[i] < 0.0 else vec


def pca(points, k: int) -> PcaBasis:
    """Top-k principal directions of the population covariance.

    Rank-deficient data yields zero stds for null directions.
    """
    x = np.asarray(points, dtype=np.float64)
    n, d = x.shape
    if n < 2:
        raise ValueError("pca needs at least two points")
    k = int(k)
    if not 1 <= k <= min(n - 1, d):
        raise ValueError(f"k must lie in [1, min(N-1, D)] = [1, {min(n - 1, d)}]")
    mean = x.mean(axis=0)
    xc = x - mean
    with np.errstate(over="ignore", invalid="ignore"):
        cov = (xc.T @ xc) / n
    if not np.isfinite(cov).all():
        raise NumericalError("covariance overflowed; rescale the data")
    evals, evecs = np.linalg.eigh(cov)
    pairs = [(float(evals[i]), _sign_fix(evecs[:, i].copy())) for i in range(d)]
    pairs.sort(key=lambda p: (-p[0], tuple(p[1])))
    directions = np.vstack([v for _, v in pairs[:k]])
    stds = np.sqrt(np.maximum([ev for ev, _ in pairs[:k]], 0.0))
    return PcaBasis(mean=mean, directions=directions, stds=stds)


def normalize_grid_axes(coords) -> np.ndarray:
    """Affinely map each axis from [min, max] of the node coordinates onto
    [-1, 1]; axes with zero extent map to 0."""
    coords = np.asarray(coords, dtype=np.float64)
    lo = coords.min(axis=0)
    hi = coords.max(axis=0)
    extent = hi - lo
    out = np.zeros_like(coords)
    on = extent > 0.0
    out[:, on] = 2.0 * (coords[:, on] - lo[on]) / extent[on] - 1.0
    return out


def init_refs(basis: PcaBasis, grid: LatentGrid) -> np.ndarray:
    """Spread the initial reference vectors over the data's principal plane:
    w_j = mean + 2 * sum_l rnorm_jl * std_l * u_l."""
    k = basis.k
    rnorm = normalize_grid_axes(grid.coords[:, :k])
    return basis.mean[None, :] + 2.0 * (rnorm * basis.stds[None, :]) @ basis.directions


def init_assignments(points, refs, lam: float) -> Assignments:
    """Softmax assignments from the data-space distortion only:
    p_ij proportional to exp(-||x_i - w_j||^2 / lam)."""
    if not float(lam) > 0.0:
        raise ValueError("lambda must be > 0")
    p, _ = backends.fused_soft_assign(points, refs, float(lam))
    return Assignments(p)
