"""Entropy-regularized topographic map with per-point latent positions.

The objective couples a data-space quantization term with a latent
proximity term through soft assignments,

    J = sum_ij p_ij * (||x_i - w_j||^2 + gamma * ||v_i - r_j||^2)
        + lam * sum_ij p_ij * ln p_ij,

and is minimized by cyclic block coordinate descent with closed-form
updates for the latent positions V, the references W, and the
assignments P. Every update is the exact block minimizer, so the
objective is non-increasing and each iteration costs O(NM) (times the
ambient dimensions) with no node-node coupling.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.special import xlogy

from . import backends
from .core import (
    Assignments,
    FitConfig,
    FitReport,
    HyperParams,
    LatentGrid,
    MapModel,
    NumericalError,
    as_points,
)
from .initialization import init_assignments, init_refs, pca

# column masses below this are underflow artifacts; the node is frozen
MASS_FLOOR = 1e-300


@dataclass
class SomOlpState:
    model: MapModel
    assign: Assignments
    hp: HyperParams

    def __post_init__(self):
        if self.assign.m != self.model.grid.m:
            raise ValueError("assignments and grid disagree on the node count")
        if self.assign.n != self.model.latents.shape[0]:
            raise ValueError("assignments and latents disagree on the point count")


def local_cost(x, w, v, r, gamma: float) -> float:
    """||x - w||^2 + gamma * ||v - r||^2 for a single point/node pair."""
    if not float(gamma) >= 0.0:
        raise ValueError("gamma must be >= 0")
    x = np.asarray(x, dtype=np.float64).reshape(-1)
    w = np.asarray(w, dtype=np.float64).reshape(-1)
    v = np.asarray(v, dtype=np.float64).reshape(-1)
    r = np.asarray(r, dtype=np.float64).reshape(-1)
    return float(((x - w) ** 2).sum() + gamma * ((v - r) ** 2).sum())


def entropy_term(p) -> float:
    """sum_ij p_ij * ln(p_ij) with the 0*ln(0) = 0 convention."""
    return float(xlogy(p, p).sum())


def objective(state: SomOlpState, points) -> float:
    """Full objective J at the given state."""
    x = as_points(points)
    p = state.assign.weights
    dx = backends.pairwise_sq_dists(x, state.model.refs)
    dv = backends.pairwise_sq_dists(state.model.latents, state.model.grid.coords)
    cost = dx + state.hp.gamma * dv
    return float((p * cost).sum() + state.hp.lam * entropy_term(p))


def update_assignments(points, model: MapModel, gamma: float, lam: float) -> Assignments:
    """Exact minimizer over row-stochastic P with V, W fixed: a softmax of
    the local costs at temperature lam."""
    if not float(lam) > 0.0:
        raise ValueError("lambda must be > 0")
    if not float(gamma) >= 0.0:
        raise ValueError("gamma must be >= 0")
    p, _ = backends.fused_soft_assign(
        as_points(points), model.refs, lam,
        v=model.latents, r=model.grid.coords, gamma=gamma,
    )
    return Assignments(p)


def update_latents(assign: Assignments, grid: LatentGrid) -> np.ndarray:
    """Exact minimizer over V: v_i = sum_j p_ij r_j (convex combination of
    the node coordinates)."""
    return assign.weights @ grid.coords


def update_refs(assign: Assignments, points, prev=None) -> np.ndarray:
    """Exact minimizer over W: the assignment-weighted centroids.

    Nodes whose column mass underflows keep their previous reference (or
    fall back to the data mean when no previous value exists); exact
    softmax assignments are strictly positive, so this only covers
    floating-point underflow.
    """
    x = as_points(points)
    p = assign.weights
    mass = p.sum(axis=0)
    alive = mass > MASS_FLOOR
    refs = np.empty((p.shape[1], x.shape[1]))
    refs[alive] = (p.T[alive] @ x) / mass[alive, None]
    if not alive.all():
        if prev is not None:
            refs[~alive] = np.asarray(prev, dtype=np.float64)[~alive]
        else:
            refs[~alive] = x.mean(axis=0)[None, :]
    return refs


def fit(points, grid: LatentGrid, hp: HyperParams, cfg: FitConfig | None = None,
        *, early_stop: bool = True, callback=None):
    """Cyclic block coordinate descent: init W by PCA, P from the data-space
    distortion, then iterate V -> W -> P until the relative objective change
    drops to cfg.tol or max_iters is reached.

    Returns (SomOlpState, FitReport). ``callback(t, v, w, p, j)`` is invoked
    after each completed cycle with live arrays (copy before storing).
    """
    x = as_points(points)
    cfg = cfg or FitConfig()
    r = grid.coords
    k = min(grid.l, x.shape[1], x.shape[0] - 1)
    basis = pca(x, k)
    w = init_refs(basis, grid)
    p = init_assignments(x, w, hp.lam).weights

    trace: list[float] = []
    times: list[float] = []
    converged = False
    j_prev = None
    t = 0
    for t in range(1, cfg.max_iters + 1):
        t0 = time.perf_counter()
        v = p @ r
        w = _centroids(p, x, w)
        p, row_obj = backends.fused_soft_assign(x, w, hp.lam, v=v, r=r, gamma=hp.gamma)
        j = float(row_obj.sum())
        times.append((time.perf_counter() - t0) * 1e3)
        trace.append(j)
        if not np.isfinite(j):
            raise NumericalError("objective became non-finite")
        if callback is not None:
            callback(t, v, w, p, j)
        if early_stop and j_prev is not None:
            if abs(j - j_prev) / max(1.0, abs(j_prev)) <= cfg.tol:
                converged = True
                break
        j_prev = j

    state = SomOlpState(
        model=MapModel(grid=grid, refs=w, latents=v),
        assign=Assignments(p),
        hp=hp,
    )
    return state, FitReport(trace, t, converged, times)


def _centroids(p, x, prev):
    mass = p.sum(axis=0)
    alive = mass > MASS_FLOOR
    if alive.all():
        return (p.T @ x) / mass[:, None]
    refs = np.empty((p.shape[1], x.shape[1]))
    refs[alive] = (p.T[alive] @ x) / mass[alive, None]
    refs[~alive] = prev[~alive]
    return refs


def objective_laplacian_form(assign: Assignments, points, grid: LatentGrid,
                             gamma: float, lam: float) -> float:
    """J with the block-optimal V and W substituted in, rewritten as
    graph-Laplacian quadratic forms plus the entropy term:

        tr(X^T L_data X) + gamma * tr(R^T L_lat R) + lam * sum p ln p,
        L_data = I - P D_n^{-1} P^T,  L_lat = D_n - P^T P.

    Nodes with zero column mass drop out of the D_n^{-1} term (the limit of
    the expression as the mass vanishes).
    """
    x = as_points(points)
    p = assign.weights
    r = grid.coords
    mass = p.sum(axis=0)
    alive = mass > 0.0
    ptx = p.T @ x
    data_term = float((x * x).sum() - ((ptx[alive] ** 2).sum(axis=1) / mass[alive]).sum())
    pr = p @ r
    lat_term = float((mass * (r * r).sum(axis=1)).sum() - (pr * pr).sum())
    return data_term + float(gamma) * lat_term + float(lam) * entropy_term(p)
