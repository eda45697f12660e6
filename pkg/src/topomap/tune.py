"""Seeded random-search tuner over the per-method hyperparameter ranges.

A study draws ``trials`` parameter samples, scores each fitted model by
the mean of trustworthiness and continuity, and keeps its best trial;
across studies the kept trial with the smallest quantization error wins.
Sampling is a pure function of (seed, index), so studies are
deterministic and trials may run in any order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .baselines import bsom_fit, latent_positions_of, pca_project, stvq_fit, stvqf_fit
from .core import (
    FitConfig,
    HyperParams,
    LatentGrid,
    NumericalError,
    as_points,
    make_square_grid,
)
from .metrics import continuity, quantization_error, trustworthiness, tuning_score
from .som_olp import fit as som_olp_fit

METHODS = ("som-olp", "bsom", "stvq", "stvqf", "pca")
NEIGHBORS = 5  # protocol constant for trustworthiness/continuity


@dataclass
class ParamSpec:
    name: str
    low: float
    high: float
    scale: str = "log"       # "log" or "linear"
    integer: bool = False

    def __post_init__(self):
        if self.scale not in ("log", "linear"):
            raise ValueError("scale must be 'log' or 'linear'")
        if not self.low < self.high:
            raise ValueError("low must be < high")
        if self.scale == "log" and not self.low > 0:
            raise ValueError("log scale requires low > 0")


@dataclass
class SearchSpace:
    entries: tuple[ParamSpec, ...]

    def __post_init__(self):
        self.entries = tuple(self.entries)


_DEFAULT_SPACES = {
    "som-olp": (ParamSpec("gamma", 1e-3, 1e3), ParamSpec("lam", 1e-3, 1e3)),
    "bsom": (ParamSpec("sigma", 1e-3, 1e3),),
    "stvq": (ParamSpec("sigma", 1e-3, 1e3), ParamSpec("lam", 1e-3, 1e3)),
    "stvqf": (ParamSpec("sigma", 1e-3, 1e3), ParamSpec("lam", 1e-3, 1e3)),
}


def default_space(method: str) -> SearchSpace:
    if method not in _DEFAULT_SPACES:
        raise ValueError(f"no search space for method {method!r}")
    return SearchSpace(_DEFAULT_SPACES[method])


def sample(space: SearchSpace, seed, index: int) -> dict:
    """Draw one parameter set; log-scale entries are uniform in log10,
    integer entries round to the nearest integer inside the range."""
    rng = np.random.default_rng([np.uint64(seed), np.uint64(index)])
    params = {}
    for spec in space.entries:
        if spec.scale == "log":
            value = 10.0 ** rng.uniform(math.log10(spec.low), math.log10(spec.high))
        else:
            value = rng.uniform(spec.low, spec.high)
        if spec.integer:
            value = int(min(max(round(value), math.ceil(spec.low)), math.floor(spec.high)))
        params[spec.name] = value
    return params


@dataclass
class TrialRecord:
    params: dict
    score: float
    qe: float
    tw: float
    cn: float
    iterations: int
    study: int = 0
    trial: int = 0


def fit_method(method: str, points, grid: LatentGrid, params: dict,
               cfg: FitConfig):
    """Dispatch one fit; returns (result, refs-or-None, report-or-None)."""
    x = as_points(points)
    if method == "som-olp":
        hp = HyperParams(gamma=params["gamma"], lam=params["lam"])
        state, report = som_olp_fit(x, grid, hp, cfg)
        return state, state.model.refs, report
    if method == "bsom":
        result, report = bsom_fit(x, grid, params["sigma"], cfg)
        return result, result.refs, report
    if method == "stvq":
        state, report = stvq_fit(x, grid, params["sigma"], params["lam"], cfg)
        return state, state.refs, report
    if method == "stvqf":
        state, report = stvqf_fit(x, grid, params["sigma"], params["lam"], cfg)
        return state, state.refs, report
    if method == "pca":
        proj = pca_project(x, grid.l)
        return proj, None, None
    raise ValueError(f"unknown method {method!r}")


def score_trial(method: str, points, grid: LatentGrid, params: dict,
                cfg: FitConfig, k: int = NEIGHBORS):
    """Fit and evaluate one parameter set: (tw, cn, qe, iterations, result)."""
    x = as_points(points)
    result, refs, report = fit_method(method, x, grid, params, cfg)
    latent = latent_positions_of(result, grid)
    tw = trustworthiness(x, latent, k)
    cn = continuity(x, latent, k)
    qe = quantization_error(x, refs) if refs is not None else math.nan
    return tw, cn, qe, report.iterations if report else 0, result


def iter_trials(method: str, dataset, space: SearchSpace | None = None,
                trials: int = 100, studies: int = 5,
                cfg: FitConfig | None = None, grid: LatentGrid | None = None,
                k: int = NEIGHBORS):
    """Yield one TrialRecord per successful trial, in (study, trial) order.

    Failing trials (exceptions or non-finite metrics) are skipped.
    """
    if trials < 1 or studies < 1:
        raise ValueError("trials and studies must be >= 1")
    x = as_points(dataset)
    cfg = cfg or FitConfig()
    grid = grid or make_square_grid(16)
    space = space or default_space(method)
    for s in range(studies):
        study_seed = np.random.SeedSequence([cfg.seed, s]).generate_state(1)[0]
        for t in range(trials):
            params = sample(space, study_seed, t)
            try:
                tw, cn, qe, iterations, _ = score_trial(method, x, grid, params, cfg, k)
            except (ValueError, ArithmeticError, MemoryError, NumericalError,
                    np.linalg.LinAlgError):
                continue  # failed trials never abort the study
            if not (math.isfinite(tw) and math.isfinite(cn) and math.isfinite(qe)):
                continue
            yield TrialRecord(params=params, score=tuning_score(tw, cn), qe=qe,
                              tw=tw, cn=cn, iterations=iterations, study=s, trial=t)


def select_best(records) -> TrialRecord:
    """Per study keep the highest score (ties: earliest trial); across
    studies return the kept trial with the smallest quantization error
    (ties: earliest study)."""
    per_study: dict[int, TrialRecord] = {}
    for rec in records:
        cur = per_study.get(rec.study)
        if cur is None or rec.score > cur.score:
            per_study[rec.study] = rec
    if not per_study:
        raise ValueError("every trial failed; nothing to select")
    return min(per_study.values(), key=lambda r: (r.qe, r.study))


def run_study(method: str, dataset, space: SearchSpace | None = None,
              trials: int = 100, studies: int = 5,
              cfg: FitConfig | None = None, grid: LatentGrid | None = None,
              k: int = NEIGHBORS) -> TrialRecord:
    """Full tuning protocol; deterministic given (cfg.seed, method, dataset)."""
    return select_best(iter_trials(method, dataset, space, trials, studies, cfg, grid, k))


def trials_to_csv(records, path) -> None:
    """One row per trial; parameter columns are the union over records."""
    records = list(records)
    names = sorted({name for rec in records for name in rec.params})
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(["study", "trial", *names, "score", "tw", "cn", "qe",
                           "iterations"]) + "\n")
        for rec in records:
            cells = [str(rec.study), str(rec.trial)]
            cells += ["%.17g" % rec.params[n] if n in rec.params else "" for n in names]
            cells += ["%.17g" % v for v in (rec.score, rec.tw, rec.cn, rec.qe)]
            cells.append(str(rec.iterations))
            fh.write(",".join(cells) + "\n")
