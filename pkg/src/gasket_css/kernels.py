"""Kernel dispatch: compiled int64/int128 loops when safe, exact Python otherwise.

Corner tables are ``(ncells, 3)`` integer arrays.  The compiled module is
imported once; set ``GASKET_CSS_PURE=1`` to force the fallback.  Each entry
point checks operand magnitudes so that the compiled path can never overflow;
anything larger goes through unbounded Python integers.
"""

import os

import numpy as np

from . import _pykernels

try:
    if os.environ.get("GASKET_CSS_PURE"):
        raise ImportError("pure-Python kernels forced")
    from . import _ckernels
except ImportError:
    _ckernels = None

HAVE_COMPILED = _ckernels is not None

_I64 = 2**62
_I128 = 2**125


def backend() -> str:
    return "cython" if HAVE_COMPILED else "python"


def _maxabs(u) -> int:
    if u.size == 0:
        return 0
    return int(max(abs(int(u.max())), abs(int(u.min()))))


def _as_i64(u):
    if u.dtype == np.int64:
        return np.ascontiguousarray(u)
    return np.ascontiguousarray(u.astype(np.int64))


def as_table(values) -> np.ndarray:
    """Integer corner table from nested Python ints (object dtype if too large)."""
    arr = np.array(values, dtype=object).reshape(-1, 3)
    if _maxabs(arr) < _I64:
        return arr.astype(np.int64)
    return arr


def refine(u, levels: int = 1):
    """Harmonic refinement of every cell ``levels`` times; the scale grows by 5**levels."""
    for _ in range(levels):
        if HAVE_COMPILED and _maxabs(u) * 5 < _I64:
            u = _ckernels.refine(_as_i64(u))
        else:
            u = _pykernels.refine(u)
    return u


def _small(u, limit=_I64) -> bool:
    return HAVE_COMPILED and _maxabs(u) < limit


def cell_energy(u):
    # per-cell result is at most 12 * max|u|**2
    if _small(u, 2**29):
        return _ckernels.cell_energy(_as_i64(u))
    return _pykernels.cell_energy(u)


def energy_total(u) -> int:
    m = _maxabs(u)
    if HAVE_COMPILED and m < _I64 // 4 and 12 * m * m * max(len(u), 1) < _I128:
        return _ckernels.energy_total(_as_i64(u))
    return _pykernels.energy_total(u)


def square_bound_sums(f) -> tuple[int, int]:
    m = _maxabs(f)
    if HAVE_COMPILED and m < _I64 and m * m * max(len(f), 1) < _I128:
        return _ckernels.square_bound_sums(_as_i64(f))
    return _pykernels.square_bound_sums(f)


def weighted_square_bounds(f, w) -> tuple[int, int]:
    """Sums over cells of (min corner f^2) * w and (max corner f^2) * w."""
    m, mw = _maxabs(f), _maxabs(np.asarray(w))
    if HAVE_COMPILED and m < _I64 and mw < _I64 and m * m * mw * max(len(f), 1) < _I128:
        return _ckernels.weighted_square_bounds(_as_i64(f), _as_i64(np.asarray(w)))
    return _pykernels.weighted_square_bounds(f, w)


def polarized_sum(f, p) -> int:
    """Sum over cell edges of (f_p^2 + f_q^2) * (phi_p - phi_q)^2."""
    mf, mp = _maxabs(f), _maxabs(p)
    if (HAVE_COMPILED and mf < 2**62 and mp < 2**61
            and 2 * mf * mf * 4 * mp * mp * 3 * max(len(f), 1) < _I128):
        return _ckernels.polarized_sum(_as_i64(f), _as_i64(p))
    return _pykernels.polarized_sum(f, p)
