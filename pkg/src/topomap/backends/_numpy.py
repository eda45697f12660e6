"""Pure-NumPy implementations of the hot kernels.

Fallback used when the compiled extension is unavailable (or when forced
via ``TOPOMAP_BACKEND=numpy``). Semantics match
:mod:`topomap.backends._native`: squared distances are accumulated
directly from coordinate differences, softmax rows are shifted by the
row minimum of the cost before exponentiation, and argmin ties go to the
smallest index.

Row blocks are processed in chunks so the ``n_rows x n_refs x dim``
difference tensor never exceeds a fixed budget.
"""

import numpy as np

# upper bound on the broadcast temporary, in float64 elements
_CHUNK_BUDGET = 2**24


def _row_chunk(m, d):
    return max(1, _CHUNK_BUDGET // max(1, m * d))


def pairwise_sq_dists(a, b, n_threads=1):
    """Squared Euclidean distances, out[i, j] = ||a_i - b_j||^2."""
    a = np.ascontiguousarray(a, dtype=np.float64)
    b = np.ascontiguousarray(b, dtype=np.float64)
    n, d = a.shape
    m = b.shape[0]
    out = np.empty((n, m))
    step = _row_chunk(m, d)
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        diff = a[lo:hi, None, :] - b[None, :, :]
        np.einsum("ijk,ijk->ij", diff, diff, out=out[lo:hi])
    return out


def nearest(x, w, n_threads=1):
    """Index of the nearest reference per row plus the squared distance.

    Ties resolve to the smallest index.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n, d = x.shape
    m = w.shape[0]
    idx = np.empty(n, dtype=np.int64)
    dmin = np.empty(n)
    step = _row_chunk(m, d)
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        diff = x[lo:hi, None, :] - w[None, :, :]
        d2 = np.einsum("ijk,ijk->ij", diff, diff)
        idx[lo:hi] = np.argmin(d2, axis=1)
        dmin[lo:hi] = d2[np.arange(hi - lo), idx[lo:hi]]
    return idx, dmin


def soft_assign(cost, lam, n_threads=1):
    """Row softmax of exp(-cost/lam) with a min-shift per row.

    Returns ``(p, row_obj)`` where ``row_obj[i] = cmin_i - lam*log(Z_i)``
    is row i's contribution to ``sum_j p_ij*cost_ij + lam*sum_j p_ij*ln p_ij``
    at the freshly computed assignments.
    """
    cost = np.asarray(cost, dtype=np.float64)
    cmin = cost.min(axis=1)
    p = np.exp(-(cost - cmin[:, None]) / lam)
    z = p.sum(axis=1)
    p /= z[:, None]
    row_obj = cmin - lam * np.log(z)
    return p, row_obj


def fused_soft_assign(x, w, lam, v=None, r=None, gamma=0.0, col_offset=None,
                      n_threads=1):
    """Softmax assignments over the cost ||x_i-w_j||^2 [+ gamma*||v_i-r_j||^2] [+ off_j].

    Same return convention as :func:`soft_assign`. The latent term is only
    evaluated when both ``v`` and ``r`` are given.
    """
    x = np.ascontiguousarray(x, dtype=np.float64)
    w = np.ascontiguousarray(w, dtype=np.float64)
    n = x.shape[0]
    m = w.shape[0]
    latent = v is not None and r is not None
    if latent:
        v = np.ascontiguousarray(v, dtype=np.float64)
        r = np.ascontiguousarray(r, dtype=np.float64)
    p = np.empty((n, m))
    row_obj = np.empty(n)
    step = _row_chunk(m, x.shape[1] + (v.shape[1] if latent else 0))
    for lo in range(0, n, step):
        hi = min(lo + step, n)
        cost = pairwise_sq_dists(x[lo:hi], w)
        if latent:
            cost += gamma * pairwise_sq_dists(v[lo:hi], r)
        if col_offset is not None:
            cost += col_offset[None, :]
        p[lo:hi], row_obj[lo:hi] = soft_assign(cost, lam)
    return p, row_obj
