"""Gaussian neighborhood kernels over the latent grid.

Both kernel forms shift each row's exponent by its maximum before
exponentiation, so no entry can overflow even for extreme widths.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends
from .core import LatentGrid


@dataclass
class KernelMatrix:
    values: np.ndarray  # (M, M)
    normalized: bool


def _check_sigma(sigma):
    sigma = float(sigma)
    if not sigma > 0.0:
        raise ValueError("sigma must be > 0")
    return sigma


def gaussian_kernel(grid: LatentGrid, sigma: float) -> KernelMatrix:
    """Unnormalized kernel K[j, k] = exp(-||r_j - r_k||^2 / (2 sigma^2))."""
    sigma = _check_sigma(sigma)
    d2 = backends.pairwise_sq_dists(grid.coords, grid.coords)
    return KernelMatrix(np.exp(-d2 / (2.0 * sigma * sigma)), normalized=False)


def normalized_kernel(grid: LatentGrid, sigma: float) -> KernelMatrix:
    """Row-normalized kernel h[j, k]; every row sums to 1."""
    sigma = _check_sigma(sigma)
    d2 = backends.pairwise_sq_dists(grid.coords, grid.coords)
    expo = -d2 / (2.0 * sigma * sigma)
    expo -= expo.max(axis=1, keepdims=True)
    h = np.exp(expo)
    h /= h.sum(axis=1, keepdims=True)
    return KernelMatrix(h, normalized=True)


def continuous_kernel(r, grid: LatentGrid, sigma: float) -> np.ndarray:
    """Normalized neighborhood weights h(r, r_k) of a free latent point r."""
    sigma = _check_sigma(sigma)
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    if r.shape[0] != grid.l:
        raise ValueError("latent point dimension does not match the grid")
    d2 = ((grid.coords - r[None, :]) ** 2).sum(axis=1)
    expo = -d2 / (2.0 * sigma * sigma)
    expo -= expo.max()
    h = np.exp(expo)
    return h / h.sum()


def neighborhood_distortion(r, x, refs, grid: LatentGrid, sigma: float) -> float:
    """Kernel-weighted quantization error of x at latent position r:
    sum_k h(r, r_k) * ||x - w_k||^2. Diagnostic only."""
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    refs = np.asarray(refs, dtype=np.float64)
    if refs.ndim != 2 or refs.shape[0] != grid.m:
        raise ValueError("refs must have one row per grid node")
    if refs.shape[1] != x.shape[0]:
        raise ValueError("point dimension does not match the references")
    h = continuous_kernel(r, grid, sigma)
    d2 = ((refs - x[None, :]) ** 2).sum(axis=1)
    return float(h @ d2)
