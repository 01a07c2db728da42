"""Independent reference computations used by the tests.

Everything here works on plain dicts of vertex values and enumerates edges and
cells directly, without corner tables or compiled kernels.  The closed forms
were derived symbolically for harmonic functions on a single level-0 cell.
"""

from fractions import Fraction
from itertools import combinations

from gasket_css.geometry import edges, vertices


def extend_once(values: dict, region, m: int) -> dict:
    """Harmonic extension of level-m vertex values to level m-1."""
    out = dict(values)
    for cell in region.subcells(m):
        corners = cell.corners()
        u = [values[p] for p in corners]
        for i, j in combinations(range(3), 2):
            k = 3 - i - j
            mid = corners[i].midpoint(corners[j])
            out[mid] = (2 * u[i] + 2 * u[j] + u[k]) / 5
    return out


def extend(values: dict, region, m_from: int, m_to: int) -> dict:
    for m in range(m_from, m_to, -1):
        values = extend_once(values, region, m)
    return values


def restrict(values: dict, region, m: int) -> dict:
    keep = vertices(region, m)
    return {p: v for p, v in values.items() if p in keep}


def energy(values: dict, region, m: int) -> Fraction:
    total = sum(((values[p] - values[q]) ** 2 for p, q in edges(region, m)), Fraction(0))
    return total * Fraction(3, 5) ** m


def f2_dm_harmonic(u) -> Fraction:
    """Integral of h^2 dm over a level-0 cell for h harmonic with corner values u."""
    u0, u1, u2 = (Fraction(x) for x in u)
    return (7 * (u0 * u0 + u1 * u1 + u2 * u2) + 8 * (u0 * u1 + u0 * u2 + u1 * u2)) / 45


def f2_dgamma_harmonic(f, p) -> Fraction:
    """Integral of f^2 dGamma(phi, phi) over a level-0 cell, f and phi harmonic."""
    f0, f1, f2 = (Fraction(x) for x in f)
    p0, p1, p2 = (Fraction(x) for x in p)
    s = (58*f0**2*p0**2 - 58*f0**2*p0*p1 - 58*f0**2*p0*p2 + 20*f0**2*p1**2 + 18*f0**2*p1*p2 + 20*f0**2*p2**2
         + 29*f0*f1*p0**2 - 40*f0*f1*p0*p1 - 18*f0*f1*p0*p2 + 29*f0*f1*p1**2 - 18*f0*f1*p1*p2 + 18*f0*f1*p2**2
         + 29*f0*f2*p0**2 - 18*f0*f2*p0*p1 - 40*f0*f2*p0*p2 + 18*f0*f2*p1**2 - 18*f0*f2*p1*p2 + 29*f0*f2*p2**2
         + 20*f1**2*p0**2 - 58*f1**2*p0*p1 + 18*f1**2*p0*p2 + 58*f1**2*p1**2 - 58*f1**2*p1*p2 + 20*f1**2*p2**2
         + 18*f1*f2*p0**2 - 18*f1*f2*p0*p1 - 18*f1*f2*p0*p2 + 29*f1*f2*p1**2 - 40*f1*f2*p1*p2 + 29*f1*f2*p2**2
         + 20*f2**2*p0**2 + 18*f2**2*p0*p1 - 58*f2**2*p0*p2 + 20*f2**2*p1**2 - 58*f2**2*p1*p2 + 58*f2**2*p2**2)
    return s / 87
