"""Pure-Python kernels (numpy object arrays, unbounded integers).

Same contract as the compiled module; used when it is unavailable or when the
operands are too large for 64/128-bit arithmetic.
"""

import numpy as np


def _obj(u):
    return np.asarray(u, dtype=object)


def refine(u):
    u = _obj(u)
    n = u.shape[0]
    a, b, c = u[:, 0], u[:, 1], u[:, 2]
    m12 = 2 * a + 2 * b + c
    m13 = 2 * a + 2 * c + b
    m23 = 2 * b + 2 * c + a
    out = np.empty((3 * n, 3), dtype=object)
    out[0::3, 0], out[0::3, 1], out[0::3, 2] = 5 * a, m12, m13
    out[1::3, 0], out[1::3, 1], out[1::3, 2] = m12, 5 * b, m23
    out[2::3, 0], out[2::3, 1], out[2::3, 2] = m13, m23, 5 * c
    return out


def cell_energy(u):
    u = _obj(u)
    a, b, c = u[:, 0], u[:, 1], u[:, 2]
    return (a - b) ** 2 + (a - c) ** 2 + (b - c) ** 2


def energy_total(u):
    return int(cell_energy(u).sum())


def _square_bounds(f):
    f = _obj(f)
    mn = np.minimum(np.minimum(f[:, 0], f[:, 1]), f[:, 2])
    mx = np.maximum(np.maximum(f[:, 0], f[:, 1]), f[:, 2])
    straddle = (mn <= 0) & (mx >= 0)
    near = np.where(mn > 0, mn, mx)
    lo = np.where(straddle, 0, near * near)
    far = np.maximum(mx, -mn)
    return lo, far * far


def square_bound_sums(f):
    lo, hi = _square_bounds(f)
    return int(lo.sum()), int(hi.sum())


def weighted_square_bounds(f, w):
    lo, hi = _square_bounds(f)
    w = _obj(w)
    return int((lo * w).sum()), int((hi * w).sum())


def polarized_sum(f, p):
    f = _obj(f)
    p = _obj(p)
    sq = f * f
    total = 0
    for i, j in ((0, 1), (0, 2), (1, 2)):
        total += int(((sq[:, i] + sq[:, j]) * (p[:, i] - p[:, j]) ** 2).sum())
    return total
