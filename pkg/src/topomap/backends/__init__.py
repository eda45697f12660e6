"""Kernel backend selection.

The hot inner loops (pairwise squared distances, fused softmax
assignments, nearest-reference queries) exist twice: a Cython/OpenMP
extension (``_native``) and a pure-NumPy fallback (``_numpy``). The
extension is preferred when importable; set ``TOPOMAP_BACKEND=numpy`` or
``TOPOMAP_BACKEND=native`` to force a choice.

Thread control (``set_num_threads`` / ``TOPOMAP_THREADS``) governs only
the OpenMP loops of the native extension. Those loops assign every
output element from exactly one thread with fixed-order reductions, so
results are bit-identical for any thread count. BLAS-backed matrix
products are deliberately left at the BLAS pool's own configuration;
changing it would alter summation order and hence output bits.
"""

import os

import numpy as np

from . import _numpy

try:
    from . import _native
except ImportError:  # extension not built; fall back to NumPy
    _native = None

_requested = os.environ.get("TOPOMAP_BACKEND", "").strip().lower()
if _requested in ("", "auto"):
    _impl = _native if _native is not None else _numpy
elif _requested == "numpy":
    _impl = _numpy
elif _requested in ("native", "compiled"):
    if _native is None:
        raise ImportError(
            "TOPOMAP_BACKEND=native but the compiled extension is not available"
        )
    _impl = _native
else:
    raise ValueError(f"unknown TOPOMAP_BACKEND value: {_requested!r}")

BACKEND = "native" if _impl is _native else "numpy"
HAVE_NATIVE = _native is not None

_num_threads = max(1, os.cpu_count() or 1)
if os.environ.get("TOPOMAP_THREADS"):
    _num_threads = max(1, int(os.environ["TOPOMAP_THREADS"]))


def set_num_threads(n):
    """Set the OpenMP thread count used by the native kernels."""
    global _num_threads
    n = int(n)
    if n < 1:
        raise ValueError("thread count must be >= 1")
    _num_threads = n


def get_num_threads():
    return _num_threads


def get_backend(name=None):
    """Return a backend module by name ('native' or 'numpy'); default: active."""
    if name is None:
        return _impl
    if name == "numpy":
        return _numpy
    if name in ("native", "compiled"):
        if _native is None:
            raise ValueError("native backend unavailable")
        return _native
    raise ValueError(f"unknown backend: {name!r}")


def _c2d(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def pairwise_sq_dists(a, b):
    """out[i, j] = ||a_i - b_j||^2 (direct accumulation, no expansion trick)."""
    return _impl.pairwise_sq_dists(_c2d(a), _c2d(b), _num_threads)


def nearest(x, w):
    """Per-row nearest reference: (indices, squared distances). Ties -> smallest index."""
    return _impl.nearest(_c2d(x), _c2d(w), _num_threads)


def soft_assign(cost, lam):
    """Row softmax of exp(-cost/lam) with min-shift; also returns per-row
    objective contributions cmin_i - lam*log(Z_i)."""
    return _impl.soft_assign(_c2d(cost), float(lam), _num_threads)


def fused_soft_assign(x, w, lam, v=None, r=None, gamma=0.0, col_offset=None):
    """Softmax assignments over ||x_i-w_j||^2 [+ gamma*||v_i-r_j||^2] [+ off_j]."""
    return _impl.fused_soft_assign(
        _c2d(x), _c2d(w), float(lam),
        v=None if v is None else _c2d(v),
        r=None if r is None else _c2d(r),
        gamma=float(gamma),
        col_offset=None if col_offset is None else np.ascontiguousarray(col_offset, dtype=np.float64),
        n_threads=_num_threads,
    )
