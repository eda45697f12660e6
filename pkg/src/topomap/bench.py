"""Scaling harness (per-iteration wall time vs node count) and
cross-dataset rank statistics.

Timing runs are strictly serial: one warm-up iteration is discarded and
the mean of the following T iterations is reported together with its
coefficient of variation. Out-of-memory is an outcome, not a crash.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2, rankdata

from .baselines import bsom_fit, stvq_fit, stvqf_fit
from .core import FitConfig, HyperParams, as_points, make_square_grid
from .som_olp import fit as som_olp_fit


@dataclass
class BenchResult:
    method: str
    m: int
    n: int
    mean_ms: float
    cv: float
    outcome: str  # "ok" or "oom"


def time_per_iteration(method: str, points, grid_side: int, t: int = 20,
                       params: dict | None = None) -> BenchResult:
    """Mean wall-clock milliseconds per full update iteration at fixed
    hyperparameters: T+1 iterations are run without convergence exits, the
    first (warm-up) is discarded. Initialization is excluded by
    construction (reports time loop bodies only)."""
    x = as_points(points)
    grid = make_square_grid(int(grid_side))
    cfg = FitConfig(max_iters=int(t) + 1, tol=1e-300)
    if method == "pca":
        raise ValueError("pca has no update iterations to time")
    try:
        if method == "som-olp":
            _, report = som_olp_fit(x, grid, HyperParams(**params), cfg,
                                    early_stop=False)
        elif method == "bsom":
            _, report = bsom_fit(x, grid, params["sigma"], cfg, early_stop=False)
        elif method == "stvq":
            _, report = stvq_fit(x, grid, params["sigma"], params["lam"], cfg,
                                 early_stop=False)
        elif method == "stvqf":
            _, report = stvqf_fit(x, grid, params["sigma"], params["lam"], cfg,
                                  early_stop=False)
        else:
            raise ValueError(f"unknown method {method!r}")
    except MemoryError:
        return BenchResult(method, grid.m, x.shape[0], float("nan"), float("nan"), "oom")
    samples = np.asarray(report.per_iter_ms[1:], dtype=np.float64)
    mean = float(samples.mean())
    cv = float(samples.std() / mean) if mean > 0 else float("nan")
    return BenchResult(method, grid.m, x.shape[0], mean, cv, "ok")


def loglog_slope(ms, times) -> float:
    """Least-squares slope of log(time) against log(m)."""
    ms = np.asarray(ms, dtype=np.float64)
    times = np.asarray(times, dtype=np.float64)
    return float(np.polyfit(np.log(ms), np.log(times), 1)[0])


def results_to_csv(results, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("method,m,n,mean_ms,cv,outcome\n")
        for r in results:
            fh.write("%s,%d,%d,%.17g,%.17g,%s\n"
                     % (r.method, r.m, r.n, r.mean_ms, r.cv, r.outcome))


def _ranks(scores, higher_is_better):
    scores = np.asarray(scores, dtype=np.float64)
    if scores.ndim != 2:
        raise ValueError("scores must be a methods x datasets matrix")
    if np.isnan(scores).any():
        raise ValueError("scores must not contain missing values")
    signed = -scores if higher_is_better else scores
    # mid-rank ties, best method gets rank 1, per dataset column
    return np.column_stack([rankdata(signed[:, j]) for j in range(scores.shape[1])])


def average_ranks(scores, higher_is_better: bool = True) -> np.ndarray:
    """Per-method mean rank across datasets (best = 1, ties share the mean
    of the tied ranks)."""
    return _ranks(scores, higher_is_better).mean(axis=1)


def friedman_statistic(matrix, higher_is_better: bool = True,
                       precomputed_ranks: bool = False):
    """Friedman chi-square over a methods x datasets score (or rank) matrix:
    chi2 = 12/(n k (k+1)) * sum_j R_j^2 - 3 n (k+1), df = k - 1."""
    if precomputed_ranks:
        ranks = np.asarray(matrix, dtype=np.float64)
    else:
        ranks = _ranks(matrix, higher_is_better)
    k, n = ranks.shape
    if k < 2 or n < 2:
        raise ValueError("need at least 2 methods and 2 datasets")
    rank_sums = ranks.sum(axis=1)
    stat = 12.0 / (n * k * (k + 1)) * float((rank_sums ** 2).sum()) - 3.0 * n * (k + 1)
    return stat, k - 1


def friedman_pvalue(stat: float, df: int) -> float:
    """Upper chi-square tail probability of the Friedman statistic."""
    return float(chi2.sf(stat, df))
