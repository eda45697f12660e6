# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""OpenMP kernels for the distance and assignment inner loops.

Every output element is written by exactly one thread and every row
reduction runs in a fixed sequential order, so results are bit-identical
for any thread count.
"""

import numpy as np

from cython.parallel import prange
from libc.math cimport exp, log, INFINITY


def pairwise_sq_dists(double[:, ::1] a, double[:, ::1] b, int n_threads=1):
    """out[i, j] = sum_k (a[i,k] - b[j,k])**2, accumulated left to right."""
    cdef Py_ssize_t n = a.shape[0], m = b.shape[0], d = a.shape[1]
    cdef Py_ssize_t i, j, k
    cdef double acc, diff
    out_arr = np.empty((n, m))
    cdef double[:, ::1] out = out_arr
    for i in prange(n, nogil=True, num_threads=n_threads, schedule='static'):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = a[i, k] - b[j, k]
                acc = acc + diff * diff
            out[i, j] = acc
    return out_arr


def nearest(double[:, ::1] x, double[:, ::1] w, int n_threads=1):
    """Nearest reference index per row (ties to the smallest index) and
    the squared distance to it."""
    cdef Py_ssize_t n = x.shape[0], m = w.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, k, best_j
    cdef double acc, diff, best
    idx_arr = np.empty(n, dtype=np.int64)
    dmin_arr = np.empty(n)
    cdef long long[::1] idx = idx_arr
    cdef double[::1] dmin = dmin_arr
    for i in prange(n, nogil=True, num_threads=n_threads, schedule='static'):
        best = INFINITY
        best_j = 0
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - w[j, k]
                acc = acc + diff * diff
            if acc < best:
                best = acc
                best_j = j
        idx[i] = best_j
        dmin[i] = best
    return idx_arr, dmin_arr


def soft_assign(double[:, ::1] cost, double lam, int n_threads=1):
    """Row softmax of exp(-cost/lam), shifted by the row minimum cost.

    Returns (p, row_obj) with row_obj[i] = cmin_i - lam*log(Z_i), which is
    row i's contribution to sum p*cost + lam*sum p*ln p at the new p.
    """
    cdef Py_ssize_t n = cost.shape[0], m = cost.shape[1]
    cdef Py_ssize_t i, j
    cdef double cmin, z, e
    p_arr = np.empty((n, m))
    obj_arr = np.empty(n)
    cdef double[:, ::1] p = p_arr
    cdef double[::1] row_obj = obj_arr
    for i in prange(n, nogil=True, num_threads=n_threads, schedule='static'):
        cmin = INFINITY
        for j in range(m):
            if cost[i, j] < cmin:
                cmin = cost[i, j]
        z = 0.0
        for j in range(m):
            e = exp(-(cost[i, j] - cmin) / lam)
            p[i, j] = e
            z = z + e
        for j in range(m):
            p[i, j] /= z
        row_obj[i] = cmin - lam * log(z)
    return p_arr, obj_arr


def fused_soft_assign(double[:, ::1] x, double[:, ::1] w, double lam,
                      v=None, r=None, double gamma=0.0, col_offset=None,
                      int n_threads=1):
    """Fused cost + softmax: cost_ij = ||x_i-w_j||^2 [+ gamma*||v_i-r_j||^2] [+ off_j].

    The cost row is staged inside the output buffer, so no temporary of
    shape (n, m) beyond the result is allocated.
    """
    cdef Py_ssize_t n = x.shape[0], m = w.shape[0], d = x.shape[1]
    cdef Py_ssize_t i, j, k, l = 0
    cdef double acc, lat, diff, cmin, z, e
    cdef bint latent = v is not None and r is not None
    cdef bint offset = col_offset is not None
    cdef double[:, ::1] vv = None, rr = None
    cdef double[::1] off = None
    if latent:
        vv = np.ascontiguousarray(v, dtype=np.float64)
        rr = np.ascontiguousarray(r, dtype=np.float64)
        l = vv.shape[1]
    if offset:
        off = np.ascontiguousarray(col_offset, dtype=np.float64)
    p_arr = np.empty((n, m))
    obj_arr = np.empty(n)
    cdef double[:, ::1] p = p_arr
    cdef double[::1] row_obj = obj_arr
    for i in prange(n, nogil=True, num_threads=n_threads, schedule='static'):
        cmin = INFINITY
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - w[j, k]
                acc = acc + diff * diff
            if latent:
                lat = 0.0
                for k in range(l):
                    diff = vv[i, k] - rr[j, k]
                    lat = lat + diff * diff
                acc = acc + gamma * lat
            if offset:
                acc = acc + off[j]
            p[i, j] = acc
            if acc < cmin:
                cmin = acc
        z = 0.0
        for j in range(m):
            e = exp(-(p[i, j] - cmin) / lam)
            p[i, j] = e
            z = z + e
        for j in range(m):
            p[i, j] /= z
        row_obj[i] = cmin - lam * log(z)
    return p_arr, obj_arr
