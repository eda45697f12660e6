"""Command-line interface.

Subcommands: ``gen-saddle``, ``fit``, ``eval``, ``tune``, ``bench``.
Every command emits CSV/JSON files only (plots are out of scope). Exit
codes: 0 success, 2 usage error, 3 data error, 4 numerical failure,
5 out-of-memory outside of recorded bench outcomes.

``--threads`` (or the TOPOMAP_THREADS variable) sets the OpenMP thread
count of the compiled kernels; their output is bit-identical for any
setting, so seeded commands reproduce byte-for-byte. Wall-clock fields
(``per_iter_ms``, bench timings) are the only run-dependent outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import backends, bench, tune
from .baselines import latent_positions_of
from .core import DataError, Dataset, FitConfig, NumericalError, make_square_grid
from .data import gen_saddle, impute_median, load_csv, save_csv, scale_by, standardize
from .metrics import continuity, quantization_error, trustworthiness, tuning_score

SCHEMA_VERSION = 1

# Digits-tuned defaults used by `bench` when no flags override them
_BENCH_DEFAULTS = {
    "som-olp": {"gamma": 0.815, "lam": 0.331},
    "bsom": {"sigma": 0.0812},
    "stvq": {"sigma": 0.0556, "lam": 0.154},
    "stvqf": {"sigma": 0.0556, "lam": 0.154},
}


def _fmt(value):
    if isinstance(value, bool):
        return "true" if value else "false"
    if value is None:
        return "null"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return "%.17g" % v if math.isfinite(v) else "null"
    if isinstance(value, str):
        return json.dumps(value)
    if isinstance(value, dict):
        inner = ", ".join(f"{json.dumps(str(k))}: {_fmt(v)}" for k, v in value.items())
        return "{" + inner + "}"
    if isinstance(value, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_fmt(v) for v in value) + "]"
    raise TypeError(f"cannot serialize {type(value)!r}")


def write_json(payload: dict, path) -> None:
    """Deterministic JSON with floats at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(_fmt(payload) + "\n")


def _write_matrix_csv(path, header, index, matrix, labels=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(matrix.shape[0]):
            cells = [str(index[i])] + ["%.17g" % v for v in matrix[i]]
            if labels is not None:
                cells.append(str(int(labels[i])))
            fh.write(",".join(cells) + "\n")


def _load_dataset(args) -> Dataset:
    ds = load_csv(args.data, label_column=getattr(args, "label_column", None))
    if getattr(args, "impute_median", False):
        ds = impute_median(ds)
    if getattr(args, "scale_by", None) is not None:
        ds = scale_by(ds, args.scale_by)
    if getattr(args, "standardize", False):
        ds = standardize(ds)
    return ds


def _add_common(p):
    p.add_argument("--threads", type=int, default=None,
                   help="OpenMP threads for the compiled kernels (default: all cores)")


def _add_preprocessing(p):
    p.add_argument("--impute-median", action="store_true",
                   help="replace missing cells by feature-wise medians")
    p.add_argument("--scale-by", type=float, default=None, metavar="C",
                   help="divide all features by C (applied after imputation)")
    p.add_argument("--standardize", action="store_true",
                   help="zero mean, unit population variance (applied last)")
    p.add_argument("--label-column", default=None,
                   help="name of the label column in the CSV")


def _add_method_params(p):
    p.add_argument("--gamma", type=float, default=None,
                   help="latent-proximity weight (som-olp)")
    p.add_argument("--lambda", dest="lam", type=float, default=None,
                   help="entropy weight (som-olp, stvq, stvqf)")
    p.add_argument("--sigma", type=float, default=None,
                   help="neighborhood width (bsom, stvq, stvqf)")


def _method_params(parser, args):
    method = args.method
    need = {"som-olp": ("gamma", "lam"), "bsom": ("sigma",),
            "stvq": ("sigma", "lam"), "stvqf": ("sigma", "lam"), "pca": ()}
    if method not in need:
        parser.error(f"unknown method {method!r}")
    params = {}
    for name in need[method]:
        value = getattr(args, name)
        if value is None:
            flag = "--lambda" if name == "lam" else f"--{name}"
            parser.error(f"method {method} requires {flag}")
        params[name] = value
    return params


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topomap",
        description="Topographic mapping toolkit: fits, metrics, tuning and scaling benchmarks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-saddle", help="generate the saddle-manifold CSV")
    p.add_argument("--n", type=int, default=500)
    p.add_argument("--noise-std", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    _add_common(p)

    p = sub.add_parser("fit", help="fit a map and write refs/latents/report files")
    p.add_argument("--method", required=True,
                   choices=["som-olp", "bsom", "stvq", "stvqf", "pca"])
    p.add_argument("--data", required=True)
    p.add_argument("--grid-side", type=int, default=16)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--k", type=int, default=5, help="neighbors for TW/CN")
    p.add_argument("--out-dir", required=True)
    _add_method_params(p)
    _add_preprocessing(p)
    _add_common(p)

    p = sub.add_parser("eval", help="score an embedding against its data")
    p.add_argument("--data", required=True)
    p.add_argument("--latents", required=True)
    p.add_argument("--refs", default=None)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out", default=None)
    _add_common(p)

    p = sub.add_parser("tune", help="seeded random-search over the method's ranges")
    p.add_argument("--method", required=True,
                   choices=["som-olp", "bsom", "stvq", "stvqf"])
    p.add_argument("--data", required=True)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--studies", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid-side", type=int, default=16)
    p.add_argument("--max-iters", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--k", type=int, default=5)
    p.add_argument("--out-dir", required=True)
    _add_preprocessing(p)
    _add_common(p)

    p = sub.add_parser("bench", help="per-iteration wall time vs grid size")
    p.add_argument("--methods", required=True,
                   help="comma-separated subset of som-olp,bsom,stvq,stvqf")
    p.add_argument("--data", required=True)
    p.add_argument("--grid-sides", required=True,
                   help="comma-separated grid sides, e.g. 50,100,150")
    p.add_argument("--iters", type=int, default=20)
    p.add_argument("--out", required=True)
    _add_method_params(p)
    _add_preprocessing(p)
    _add_common(p)

    return parser


def cmd_gen_saddle(args) -> int:
    ds = gen_saddle(args.n, args.noise_std, args.seed)
    save_csv(ds, args.out)
    return 0


def cmd_fit(parser, args) -> int:
    params = _method_params(parser, args)
    ds = _load_dataset(args)
    x = ds.require_finite()
    grid = make_square_grid(args.grid_side)
    cfg = FitConfig(max_iters=args.max_iters, tol=args.tol, seed=args.seed)
    result, refs, fit_report = tune.fit_method(args.method, x, grid, params, cfg)
    latent = latent_positions_of(result, grid)

    os.makedirs(args.out_dir, exist_ok=True)
    point_ids = np.arange(x.shape[0])
    vcols = [f"v{i + 1}" for i in range(latent.shape[1])]
    _write_matrix_csv(
        os.path.join(args.out_dir, "latents.csv"),
        ["point", *vcols] + (["label"] if ds.labels is not None else []),
        point_ids, latent, labels=ds.labels,
    )
    if refs is not None:
        rcols = [f"r{i + 1}" for i in range(grid.l)]
        wcols = [f"w{i + 1}" for i in range(x.shape[1])]
        _write_matrix_csv(
            os.path.join(args.out_dir, "refs.csv"),
            ["node", *rcols, *wcols],
            np.arange(grid.m), np.hstack([grid.coords, refs]),
        )
    if hasattr(result, "assign"):  # soft methods only
        pcols = [f"p{j + 1}" for j in range(grid.m)]
        _write_matrix_csv(
            os.path.join(args.out_dir, "assignments.csv"),
            ["point", *pcols], point_ids, result.assign.weights,
        )

    tw = trustworthiness(x, latent, args.k)
    cn = continuity(x, latent, args.k)
    qe = quantization_error(x, refs) if refs is not None else None
    if fit_report is None:  # pca: direct computation, no iterations
        trace, iterations, converged, per_iter_ms = [], 0, True, []
    else:
        trace = fit_report.objective_trace
        iterations = fit_report.iterations
        converged = fit_report.converged
        per_iter_ms = fit_report.per_iter_ms
    payload = {
        "schema": SCHEMA_VERSION,
        "method": args.method,
        "params": params,
        "n": x.shape[0],
        "d": x.shape[1],
        "m": grid.m,
        "k": args.k,
        "seed": args.seed,
        "objective_trace": trace,
        "iterations": iterations,
        "converged": converged,
        "per_iter_ms": per_iter_ms,
        "metrics": {
            "trustworthiness": tw,
            "continuity": cn,
            "quantization_error": qe,
            "score": tuning_score(tw, cn),
        },
    }
    write_json(payload, os.path.join(args.out_dir, "report.json"))
    return 0


def _load_coords(path, prefix=None):
    """Coordinate matrix from a CSV, tolerating the fit output schemas:
    index columns (point/node) and label columns are dropped; when a
    prefix is given and matching columns exist, only those are kept."""
    ds = load_csv(path)
    names = ds.feature_names or ()
    keep = None
    if prefix is not None:
        keep = [i for i, n in enumerate(names) if n.startswith(prefix) and n[len(prefix):].isdigit()]
    if not keep:
        keep = [i for i, n in enumerate(names) if n not in ("point", "node", "label")]
    pts = ds.points[:, keep] if keep else ds.points
    if np.isnan(pts).any():
        raise DataError(f"{path}: missing values in coordinate columns")
    return pts


def cmd_eval(args) -> int:
    x = _load_coords(args.data)
    latent = _load_coords(args.latents, prefix="v")
    tw = trustworthiness(x, latent, args.k)
    cn = continuity(x, latent, args.k)
    qe = None
    if args.refs is not None:
        refs = _load_coords(args.refs, prefix="w")
        qe = quantization_error(x, refs)
    payload = {
        "schema": SCHEMA_VERSION,
        "k": args.k,
        "trustworthiness": tw,
        "continuity": cn,
        "quantization_error": qe,
        "score": tuning_score(tw, cn),
    }
    text = _fmt(payload)
    print(text)
    if args.out:
        write_json(payload, args.out)
    return 0


def cmd_tune(args) -> int:
    ds = _load_dataset(args)
    x = ds.require_finite()
    grid = make_square_grid(args.grid_side)
    cfg = FitConfig(max_iters=args.max_iters, tol=args.tol, seed=args.seed)
    records = list(tune.iter_trials(args.method, x, None, args.trials,
                                    args.studies, cfg, grid, args.k))
    best = tune.select_best(records)
    os.makedirs(args.out_dir, exist_ok=True)
    tune.trials_to_csv(records, os.path.join(args.out_dir, "trials.csv"))
    payload = {
        "schema": SCHEMA_VERSION,
        "method": args.method,
        "seed": args.seed,
        "trials": args.trials,
        "studies": args.studies,
        "best": {
            "study": best.study,
            "trial": best.trial,
            "params": best.params,
            "score": best.score,
            "tw": best.tw,
            "cn": best.cn,
            "qe": best.qe,
            "iterations": best.iterations,
        },
    }
    write_json(payload, os.path.join(args.out_dir, "best.json"))
    return 0


def cmd_bench(args) -> int:
    methods = [m.strip() for m in args.methods.split(",") if m.strip()]
    sides = [int(s) for s in args.grid_sides.split(",") if s.strip()]
    ds = _load_dataset(args)
    x = ds.require_finite()
    overrides = {"gamma": args.gamma, "lam": args.lam, "sigma": args.sigma}
    results = []
    for method in methods:
        if method not in _BENCH_DEFAULTS:
            raise DataError(f"cannot bench method {method!r}")
        params = dict(_BENCH_DEFAULTS[method])
        for name in params:
            if overrides.get(name) is not None:
                params[name] = overrides[name]
        for side in sides:
            results.append(bench.time_per_iteration(method, x, side, args.iters, params))
    bench.results_to_csv(results, args.out)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads is not None:
        backends.set_num_threads(args.threads)
    try:
        if args.command == "gen-saddle":
            return cmd_gen_saddle(args)
        if args.command == "fit":
            return cmd_fit(parser, args)
        if args.command == "eval":
            return cmd_eval(args)
        if args.command == "tune":
            return cmd_tune(args)
        if args.command == "bench":
            return cmd_bench(args)
        parser.error(f"unknown command {args.command!r}")
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 4
    except MemoryError:
        print("out of memory", file=sys.stderr)
        return 5
    except ValueError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
