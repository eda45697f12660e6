"""Comparison methods: sequential SOM, Batch SOM, soft topographic vector
quantization (full and fast), and the 2-d PCA projection.

All batch methods share the PCA initialization of the main method so that
cross-method comparisons start from identical references.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import backends
from .core import (
    Assignments,
    FitConfig,
    FitReport,
    LatentGrid,
    NumericalError,
    as_points,
)
from .initialization import init_assignments, init_refs, pca
from .kernels import KernelMatrix, gaussian_kernel, normalized_kernel
from .som_olp import MASS_FLOOR, SomOlpState, entropy_term


def bmu(x, refs) -> int:
    """Index of the best matching unit; ties go to the smallest index."""
    x = np.asarray(x, dtype=np.float64).reshape(1, -1)
    idx, _ = backends.nearest(x, np.asarray(refs, dtype=np.float64))
    return int(idx[0])


def bmu_indices(points, refs) -> np.ndarray:
    idx, _ = backends.nearest(points, refs)
    return idx


def sequential_som_step(x, refs, kernel: KernelMatrix, eta: float) -> np.ndarray:
    """One online update: every reference moves toward x proportionally to
    its kernel similarity with the BMU."""
    if not 0.0 < float(eta) < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if kernel.normalized:
        raise ValueError("sequential SOM uses the unnormalized kernel")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    refs = np.asarray(refs, dtype=np.float64)
    j = bmu(x, refs)
    return refs + eta * kernel.values[:, j][:, None] * (x[None, :] - refs)


def sequential_som_fit(points, grid: LatentGrid, sigma: float, eta: float,
                       epochs: int = 10, seed: int = 0):
    """Epoch driver: one seeded shuffled pass over the data per epoch.

    Excluded from the benchmark protocol; provided for completeness.
    """
    x = as_points(points)
    kern = gaussian_kernel(grid, sigma)
    refs = init_refs(pca(x, min(grid.l, x.shape[1], x.shape[0] - 1)), grid)
    rng = np.random.default_rng(seed)
    trace: list[float] = []
    times: list[float] = []
    for _ in range(int(epochs)):
        t0 = time.perf_counter()
        for i in rng.permutation(x.shape[0]):
            refs = sequential_som_step(x[i], refs, kern, eta)
        _, dmin = backends.nearest(x, refs)
        trace.append(float(dmin.sum()))
        times.append((time.perf_counter() - t0) * 1e3)
    return refs, FitReport(trace, int(epochs), False, times)


@dataclass
class BsomResult:
    refs: np.ndarray   # (M, D)
    bmus: np.ndarray   # (N,) final best-matching-unit indices

    @property
    def m(self) -> int:
        return self.refs.shape[0]


def bsom_fit(points, grid: LatentGrid, sigma: float, cfg: FitConfig | None = None,
             *, early_stop: bool = True):
    """Batch SOM: recompute all BMUs, then move every reference to the
    kernel-weighted mean of the data per winning node. Stops when the BMU
    vector is unchanged between iterations (there is no smooth objective;
    the trace records the summed squared BMU distance as a diagnostic).
    """
    x = as_points(points)
    cfg = cfg or FitConfig()
    kern = gaussian_kernel(grid, sigma).values
    w = init_refs(pca(x, min(grid.l, x.shape[1], x.shape[0] - 1)), grid)
    m = grid.m
    prev_bmus = None
    trace: list[float] = []
    times: list[float] = []
    converged = False
    t = 0
    for t in range(1, cfg.max_iters + 1):
        t0 = time.perf_counter()
        idx, dmin = backends.nearest(x, w)
        if early_stop and prev_bmus is not None and np.array_equal(idx, prev_bmus):
            converged = True
            t -= 1
            break
        counts = np.bincount(idx, minlength=m).astype(np.float64)
        sums = np.zeros((m, x.shape[1]))
        np.add.at(sums, idx, x)
        denom = kern @ counts
        numer = kern @ sums
        alive = denom > MASS_FLOOR
        w = np.where(alive[:, None], numer / np.where(alive, denom, 1.0)[:, None], w)
        times.append((time.perf_counter() - t0) * 1e3)
        trace.append(float(dmin.sum()))
        prev_bmus = idx
    return BsomResult(refs=w, bmus=bmu_indices(x, w)), FitReport(trace, t, converged, times)


@dataclass
class StvqState:
    assign: Assignments
    refs: np.ndarray
    kernel: KernelMatrix
    lam: float

    def __post_init__(self):
        if not self.kernel.normalized:
            raise ValueError("STVQ state carries the normalized kernel")


def _stvq_objective(p, e, lam):
    return float((p * e).sum() + lam * entropy_term(p))


def stvq_fit(points, grid: LatentGrid, sigma: float, lam: float,
             cfg: FitConfig | None = None, *, early_stop: bool = True,
             callback=None):
    """Full soft topographic VQ.

    Alternates the softmax assignment over the kernel-convolved distortion
    E_ij = sum_k h_jk ||x_i - w_k||^2 with the convolved-centroid update of
    W, evaluating E by direct matrix products (O(N M^2) per iteration).
    The entropy-regularized objective is recorded at the end of every
    cycle and is non-increasing.
    """
    x = as_points(points)
    cfg = cfg or FitConfig()
    if not float(lam) > 0.0:
        raise ValueError("lambda must be > 0")
    kern = normalized_kernel(grid, sigma)
    h = kern.values
    w = init_refs(pca(x, min(grid.l, x.shape[1], x.shape[0] - 1)), grid)
    p = init_assignments(x, w, lam).weights  # overwritten by the first update

    e = backends.pairwise_sq_dists(x, w) @ h.T
    trace: list[float] = []
    times: list[float] = []
    converged = False
    j_prev = None
    t = 0
    for t in range(1, cfg.max_iters + 1):
        t0 = time.perf_counter()
        p, _ = backends.soft_assign(e, lam)
        q = p @ h
        mass = q.sum(axis=0)
        alive = mass > MASS_FLOOR
        w_new = np.empty_like(w)
        w_new[alive] = (q.T[alive] @ x) / mass[alive, None]
        w_new[~alive] = w[~alive]
        w = w_new
        e = backends.pairwise_sq_dists(x, w) @ h.T
        j = _stvq_objective(p, e, lam)
        times.append((time.perf_counter() - t0) * 1e3)
        trace.append(j)
        if not np.isfinite(j):
            raise NumericalError("objective became non-finite")
        if callback is not None:
            callback(t, p, w, j)
        if early_stop and j_prev is not None:
            if abs(j - j_prev) / max(1.0, abs(j_prev)) <= cfg.tol:
                converged = True
                break
        j_prev = j
    state = StvqState(Assignments(p), w, kern, float(lam))
    return state, FitReport(trace, t, converged, times)


def bias_variance_split(w, h):
    """Smoothed references and per-node variances:
    wt_j = sum_k h_jk w_k,  v_j = sum_k h_jk ||w_k - wt_j||^2."""
    wt = h @ w
    vj = np.einsum("jk,jk->j", h, backends.pairwise_sq_dists(wt, w))
    return wt, vj


def stvqf_fit(points, grid: LatentGrid, sigma: float, lam: float,
              cfg: FitConfig | None = None, *, early_stop: bool = True,
              callback=None):
    """Fast soft topographic VQ via the bias-variance split of the convolved
    distortion: E_ij = ||x_i - wt_j||^2 + v_j, which brings the per-iteration
    cost down to O(NM + M^2). Fixed points coincide with :func:`stvq_fit`.
    """
    x = as_points(points)
    cfg = cfg or FitConfig()
    if not float(lam) > 0.0:
        raise ValueError("lambda must be > 0")
    kern = normalized_kernel(grid, sigma)
    h = kern.values
    w = init_refs(pca(x, min(grid.l, x.shape[1], x.shape[0] - 1)), grid)
    init_assignments(x, w, lam)  # mirrors the shared initialization protocol

    wt, vj = bias_variance_split(w, h)
    trace: list[float] = []
    times: list[float] = []
    converged = False
    j_prev = None
    t = 0
    for t in range(1, cfg.max_iters + 1):
        t0 = time.perf_counter()
        p, _ = backends.fused_soft_assign(x, wt, lam, col_offset=vj)
        mass_nodes = p.sum(axis=0)
        sx = p.T @ x
        denom = h.T @ mass_nodes
        numer = h.T @ sx
        alive = denom > MASS_FLOOR
        w_new = np.empty_like(w)
        w_new[alive] = numer[alive] / denom[alive, None]
        w_new[~alive] = w[~alive]
        w = w_new
        wt, vj = bias_variance_split(w, h)
        dxt = backends.pairwise_sq_dists(x, wt)
        j = float((p * dxt).sum() + mass_nodes @ vj + lam * entropy_term(p))
        times.append((time.perf_counter() - t0) * 1e3)
        trace.append(j)
        if not np.isfinite(j):
            raise NumericalError("objective became non-finite")
        if callback is not None:
            callback(t, p, w, j)
        if early_stop and j_prev is not None:
            if abs(j - j_prev) / max(1.0, abs(j_prev)) <= cfg.tol:
                converged = True
                break
        j_prev = j
    state = StvqState(Assignments(p), w, kern, float(lam))
    return state, FitReport(trace, t, converged, times)


def pca_project(points, l: int = 2) -> np.ndarray:
    """Centered projection onto the leading principal directions; columns
    beyond the data rank come out as zeros."""
    x = as_points(points)
    k = min(int(l), x.shape[1], x.shape[0] - 1)
    basis = pca(x, k)
    proj = (x - basis.mean[None, :]) @ basis.directions.T
    if k < l:
        proj = np.hstack([proj, np.zeros((x.shape[0], l - k))])
    return proj


def latent_positions_of(result, grid: LatentGrid | None = None) -> np.ndarray:
    """Latent representation consumed by the metrics.

    Continuous methods return their own positions; node-constrained
    methods return the coordinates of the winning node (argmax/BMU, ties
    to the smallest index); a raw matrix is taken as an embedding.
    """
    if isinstance(result, SomOlpState):
        return result.model.latents
    if isinstance(result, StvqState):
        if grid is None:
            raise ValueError("grid required for node-constrained latents")
        return grid.coords[np.argmax(result.assign.weights, axis=1)]
    if isinstance(result, BsomResult):
        if grid is None:
            raise ValueError("grid required for node-constrained latents")
        return grid.coords[result.bmus]
    arr = np.asarray(result, dtype=np.float64)
    if arr.ndim == 2:
        return arr
    raise TypeError(f"unsupported result type: {type(result)!r}")
