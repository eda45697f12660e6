#!/usr/bin/env python3
"""Benchmark the compiled OpenMP kernels against the pure-NumPy fallback.

Times the three hot kernels (pairwise squared distances, fused softmax
assignment, nearest reference) over a grid of problem sizes, checks the
backends agree, and prints a speedup table.

Usage: python benchmarks/compare_backends.py [--threads N] [--repeats R]
"""

import argparse
import time

import numpy as np

from topomap import backends


def best_of(repeats, fn, *args, **kwargs):
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args, **kwargs)
        best = min(best, time.perf_counter() - t0)
    return best, out


def rel_gap(a, b):
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), 1e-300)))


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--threads", type=int, default=backends.get_num_threads())
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    if not backends.HAVE_NATIVE:
        raise SystemExit("compiled extension not available; nothing to compare")
    native = backends.get_backend("native")
    fallback = backends.get_backend("numpy")
    nt = args.threads

    sizes = [(500, 256, 3), (1797, 2500, 64), (1797, 10000, 64)]
    rng = np.random.default_rng(0)
    print(f"threads={nt}  repeats={args.repeats} (best-of)")
    header = f"{'kernel':<14}{'n':>6}{'m':>7}{'d':>4}{'native ms':>11}{'numpy ms':>11}{'speedup':>9}{'max rel gap':>13}"
    print(header)
    print("-" * len(header))
    for n, m, d in sizes:
        x = rng.random((n, d))
        w = rng.random((m, d))
        v = rng.random((n, 2))
        r = rng.random((m, 2))

        tn, an = best_of(args.repeats, native.pairwise_sq_dists, x, w, nt)
        tf, af = best_of(args.repeats, fallback.pairwise_sq_dists, x, w)
        print(f"{'sq_dists':<14}{n:>6}{m:>7}{d:>4}{tn * 1e3:>11.1f}{tf * 1e3:>11.1f}"
              f"{tf / tn:>9.1f}{rel_gap(an, af):>13.1e}")

        tn, (pn, on) = best_of(args.repeats, native.fused_soft_assign, x, w, 0.3,
                               v=v, r=r, gamma=2.0, n_threads=nt)
        tf, (pf, of) = best_of(args.repeats, fallback.fused_soft_assign, x, w, 0.3,
                               v=v, r=r, gamma=2.0)
        print(f"{'fused_assign':<14}{n:>6}{m:>7}{d:>4}{tn * 1e3:>11.1f}{tf * 1e3:>11.1f}"
              f"{tf / tn:>9.1f}{max(rel_gap(pn, pf + 1e-300), rel_gap(on, of)):>13.1e}")

        tn, (i1, d1) = best_of(args.repeats, native.nearest, x, w, nt)
        tf, (i2, d2) = best_of(args.repeats, fallback.nearest, x, w)
        assert np.array_equal(i1, i2)
        print(f"{'nearest':<14}{n:>6}{m:>7}{d:>4}{tn * 1e3:>11.1f}{tf * 1e3:>11.1f}"
              f"{tf / tn:>9.1f}{rel_gap(d1, d2):>13.1e}")


if __name__ == "__main__":
    main()
