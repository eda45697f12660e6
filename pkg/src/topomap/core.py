"""Shared value types: dataset, latent grid, assignments, model state,
hyperparameters, fit configuration and fit report.

All matrices are dense float64, row-major. The types validate their
structural invariants at construction and are treated as read-only by
every algorithm (updates return new arrays).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

ROW_SUM_TOL = 1e-12


class DataError(ValueError):
    """Malformed or unusable input data (CSV problems, missing values, ...)."""


class NumericalError(RuntimeError):
    """A fit produced non-finite numbers."""


def _as_matrix(a, name):
    a = np.asarray(a, dtype=np.float64)
    if a.ndim != 2 or a.shape[0] < 1 or a.shape[1] < 1:
        raise ValueError(f"{name} must be a non-empty 2-d matrix, got shape {a.shape}")
    return a


@dataclass
class Dataset:
    """N x D matrix of points plus optional integer labels.

    NaN entries act as missing-value markers between CSV loading and
    imputation; algorithms call :meth:`require_finite` before use.
    """

    points: np.ndarray
    labels: np.ndarray | None = None
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        self.points = _as_matrix(self.points, "points")
        if np.isinf(self.points).any():
            raise DataError("dataset contains infinite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (self.points.shape[0],):
                raise ValueError("labels must have one entry per point")
        if self.feature_names is not None:
            self.feature_names = tuple(self.feature_names)
            if len(self.feature_names) != self.points.shape[1]:
                raise ValueError("feature_names must have one entry per column")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]

    @property
    def has_missing(self) -> bool:
        return bool(np.isnan(self.points).any())

    def require_finite(self) -> np.ndarray:
        if self.has_missing:
            raise DataError("dataset has missing values; impute before fitting")
        return self.points


def as_points(data) -> np.ndarray:
    """Accept a Dataset or a raw matrix and return validated points."""
    if isinstance(data, Dataset):
        return data.require_finite()
    pts = _as_matrix(data, "points")
    if not np.isfinite(pts).all():
        raise DataError("points contain non-finite entries")
    return pts


@dataclass
class LatentGrid:
    """M fixed node coordinates in R^L.

    ``rows``/``cols`` carry the side counts for rectangular 2-d grids and
    stay None for free-form node sets.
    """

    coords: np.ndarray
    rows: int | None = None
    cols: int | None = None

    def __post_init__(self):
        self.coords = _as_matrix(self.coords, "coords")
        if not np.isfinite(self.coords).all():
            raise ValueError("grid coordinates must be finite")

    @property
    def m(self) -> int:
        return self.coords.shape[0]

    @property
    def l(self) -> int:
        return self.coords.shape[1]


def make_square_grid(side: int, l: int = 2) -> LatentGrid:
    """Regular grid of side**l nodes spanning [-1, 1] along every axis.

    Nodes are enumerated row-major with the last axis varying fastest.
    A single-node side places the node at the midpoint 0.
    """
    side = int(side)
    if side < 1:
        raise ValueError("side must be >= 1")
    if l < 1:
        raise ValueError("latent dimension must be >= 1")
    if side == 1:
        axis = np.zeros(1)
    else:
        # (2i - (side-1)) / (side-1): exactly sign-symmetric, endpoints +-1
        axis = (2.0 * np.arange(side) - (side - 1)) / (side - 1)
    coords = np.array(list(product(axis, repeat=l)), dtype=np.float64)
    if l == 2:
        return LatentGrid(coords, rows=side, cols=side)
    return LatentGrid(coords)


@dataclass
class Assignments:
    """N x M row-stochastic assignment weights."""

    weights: np.ndarray

    def __post_init__(self):
        self.weights = _as_matrix(self.weights, "weights")
        if not row_stochastic_check(self.weights):
            raise ValueError("assignment rows must be in [0,1] and sum to 1")

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def m(self) -> int:
        return self.weights.shape[1]


def row_stochastic_check(a) -> bool:
    """True iff every entry lies in [0, 1] and every row sums to 1 within 1e-12."""
    w = a.weights if isinstance(a, Assignments) else np.asarray(a, dtype=np.float64)
    if w.ndim != 2:
        return False
    if not np.isfinite(w).all():
        return False
    if (w < 0.0).any() or (w > 1.0).any():
        return False
    return bool(np.abs(w.sum(axis=1) - 1.0).max() <= ROW_SUM_TOL)


@dataclass
class MapModel:
    """Grid plus reference vectors (M x D) and latent positions (N x L)."""

    grid: LatentGrid
    refs: np.ndarray
    latents: np.ndarray

    def __post_init__(self):
        self.refs = _as_matrix(self.refs, "refs")
        self.latents = _as_matrix(self.latents, "latents")
        if self.refs.shape[0] != self.grid.m:
            raise ValueError("refs must have one row per grid node")
        if self.latents.shape[1] != self.grid.l:
            raise ValueError("latents must live in the grid's latent space")
        if not np.isfinite(self.refs).all() or not np.isfinite(self.latents).all():
            raise ValueError("model state must be finite")


@dataclass
class HyperParams:
    """gamma: latent-proximity weight; lam: entropy weight;
    sigma: neighborhood width (baselines); eta: learning rate (sequential SOM)."""

    gamma: float = 0.0
    lam: float = 1.0
    sigma: float | None = None
    eta: float | None = None

    def __post_init__(self):
        if not self.gamma >= 0.0:
            raise ValueError("gamma must be >= 0")
        if not self.lam > 0.0:
            raise ValueError("lambda must be > 0")
        if self.sigma is not None and not self.sigma > 0.0:
            raise ValueError("sigma must be > 0")
        if self.eta is not None and not 0.0 < self.eta < 1.0:
            raise ValueError("eta must lie in (0, 1)")


@dataclass
class FitConfig:
    max_iters: int = 1000
    tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if int(self.max_iters) < 1:
            raise ValueError("max_iters must be >= 1")
        self.max_iters = int(self.max_iters)
        if not self.tol > 0.0:
            raise ValueError("tol must be > 0")
        if int(self.seed) < 0:
            raise ValueError("seed must be non-negative")
        self.seed = int(self.seed)


@dataclass
class FitReport:
    """Objective trace, iteration count, convergence flag and per-iteration
    wall-clock milliseconds (initialization excluded)."""

    objective_trace: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    per_iter_ms: list[float] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "objective_trace": [float(v) for v in self.objective_trace],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
            "per_iter_ms": [float(v) for v in self.per_iter_ms],
        }
