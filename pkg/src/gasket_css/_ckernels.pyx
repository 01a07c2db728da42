# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled integer kernels over per-cell corner tables.

Every array is an (ncells, 3) int64 table of corner values, scaled to integers.
Accumulations run in 128-bit integers; callers guarantee (see kernels.py)
that no intermediate leaves the signed 127-bit range.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef extern from *:
    """
    typedef __int128 i128;
    """
    ctypedef long long i128


cdef object _to_int(i128 x):
    # all accumulators here are non-negative
    cdef uint64_t lo = <uint64_t>x
    cdef uint64_t hi = <uint64_t>(x >> 64)
    return (int(hi) << 64) | int(lo)


def refine(const int64_t[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0], i, j
    out = np.empty((3 * n, 3), dtype=np.int64)
    cdef int64_t[:, ::1] o = out
    cdef int64_t a, b, c, m12, m13, m23
    for i in range(n):
        a = u[i, 0]
        b = u[i, 1]
        c = u[i, 2]
        m12 = 2 * a + 2 * b + c
        m13 = 2 * a + 2 * c + b
        m23 = 2 * b + 2 * c + a
        j = 3 * i
        o[j, 0] = 5 * a
        o[j, 1] = m12
        o[j, 2] = m13
        o[j + 1, 0] = m12
        o[j + 1, 1] = 5 * b
        o[j + 1, 2] = m23
        o[j + 2, 0] = m13
        o[j + 2, 1] = m23
        o[j + 2, 2] = 5 * c
    return out


def cell_energy(const int64_t[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0], i
    out = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] o = out
    cdef int64_t d1, d2, d3
    for i in range(n):
        d1 = u[i, 0] - u[i, 1]
        d2 = u[i, 0] - u[i, 2]
        d3 = u[i, 1] - u[i, 2]
        o[i] = d1 * d1 + d2 * d2 + d3 * d3
    return out


def energy_total(const int64_t[:, ::1] u):
    cdef Py_ssize_t n = u.shape[0], i
    cdef i128 acc = 0
    cdef i128 d1, d2, d3
    for i in range(n):
        d1 = u[i, 0] - u[i, 1]
        d2 = u[i, 0] - u[i, 2]
        d3 = u[i, 1] - u[i, 2]
        acc += d1 * d1 + d2 * d2 + d3 * d3
    return _to_int(acc)


cdef inline void _sq_bounds(int64_t a, int64_t b, int64_t c, i128 *lo, i128 *hi) nogil:
    cdef int64_t mn = a, mx = a, amin, amax
    if b < mn:
        mn = b
    if c < mn:
        mn = c
    if b > mx:
        mx = b
    if c > mx:
        mx = c
    if mn <= 0 <= mx:
        lo[0] = 0
    elif mn > 0:
        lo[0] = (<i128>mn) * mn
    else:
        lo[0] = (<i128>mx) * mx
    amax = mx if mx > -mn else -mn
    hi[0] = (<i128>amax) * amax


def square_bound_sums(const int64_t[:, ::1] f):
    cdef Py_ssize_t n = f.shape[0], i
    cdef i128 slo = 0, shi = 0, lo, hi
    for i in range(n):
        _sq_bounds(f[i, 0], f[i, 1], f[i, 2], &lo, &hi)
        slo += lo
        shi += hi
    return _to_int(slo), _to_int(shi)


def weighted_square_bounds(const int64_t[:, ::1] f, const int64_t[::1] w):
    cdef Py_ssize_t n = f.shape[0], i
    cdef i128 slo = 0, shi = 0, lo, hi
    for i in range(n):
        if w[i] == 0:
            continue
        _sq_bounds(f[i, 0], f[i, 1], f[i, 2], &lo, &hi)
        slo += lo * w[i]
        shi += hi * w[i]
    return _to_int(slo), _to_int(shi)


def polarized_sum(const int64_t[:, ::1] f, const int64_t[:, ::1] p):
    cdef Py_ssize_t n = f.shape[0], i
    cdef i128 acc = 0, f0, f1, f2, d01, d02, d12
    for i in range(n):
        f0 = (<i128>f[i, 0]) * f[i, 0]
        f1 = (<i128>f[i, 1]) * f[i, 1]
        f2 = (<i128>f[i, 2]) * f[i, 2]
        d01 = p[i, 0] - p[i, 1]
        d02 = p[i, 0] - p[i, 2]
        d12 = p[i, 1] - p[i, 2]
        acc += (f0 + f1) * (d01 * d01) + (f0 + f2) * (d02 * d02) + (f1 + f2) * (d12 * d12)
    return _to_int(acc)
