"""Compiled vs pure-Python kernel timings on realistic corner tables.

    python bench/bench_kernels.py --levels 6 --repeat 5
"""

import argparse
import random
import time

import numpy as np

from gasket_css import _pykernels, kernels
from gasket_css.cutoff import cell_cutoff
from gasket_css.geometry import CellAddress, neighborhood
from gasket_css.verify import random_function


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--levels", type=int, default=6, help="refinement levels below the definition level")
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    if not kernels.HAVE_COMPILED:
        raise SystemExit("compiled kernels are not built; run pip install -e . first")
    from gasket_css import _ckernels

    cell = CellAddress(4, "1213")
    region = neighborhood(cell)
    f = random_function(region, region.level - 1, random.Random(args.seed))
    phi = cell_cutoff(cell)
    depth = f.m_def - args.levels
    ft = f.corner_table(region, f.m_def).ints
    u = np.ascontiguousarray(kernels.refine(ft, args.levels), dtype=np.int64)
    p = np.ascontiguousarray(phi.corner_table(region, depth).ints, dtype=np.int64)
    w = np.asarray(_ckernels.cell_energy(p), dtype=np.int64)
    uo, po, wo = u.astype(object), p.astype(object), w.astype(object)
    base = np.ascontiguousarray(kernels.refine(ft, args.levels - 1), dtype=np.int64)

    cases = [
        ("refine", lambda: _ckernels.refine(base), lambda: _pykernels.refine(base.astype(object))),
        ("cell_energy", lambda: _ckernels.cell_energy(u), lambda: _pykernels.cell_energy(uo)),
        ("energy_total", lambda: _ckernels.energy_total(u), lambda: _pykernels.energy_total(uo)),
        ("square_bound_sums", lambda: _ckernels.square_bound_sums(u), lambda: _pykernels.square_bound_sums(uo)),
        ("weighted_square_bounds", lambda: _ckernels.weighted_square_bounds(u, w),
         lambda: _pykernels.weighted_square_bounds(uo, wo)),
        ("polarized_sum", lambda: _ckernels.polarized_sum(u, p), lambda: _pykernels.polarized_sum(uo, po)),
    ]
    print(f"cells: {len(u)} (refine input: {len(base)})")
    print(f"{'kernel':<24}{'cython s':>12}{'python s':>12}{'speedup':>10}")
    for name, fast, slow in cases:
        a, b = fast(), slow()
        if isinstance(a, tuple):
            assert tuple(map(int, a)) == tuple(map(int, b)), name
        elif np.ndim(a):
            assert [int(x) for x in np.ravel(a)] == [int(x) for x in np.ravel(b)], name
        else:
            assert int(a) == int(b), name
        tc, tp = best_of(fast, args.repeat), best_of(slow, args.repeat)
        print(f"{name:<24}{tc:>12.6f}{tp:>12.6f}{tp / tc:>10.1f}")


if __name__ == "__main__":
    main()
