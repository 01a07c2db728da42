"""Energy measures on cells and rigorous enclosures of f^2-integrals.

The energy measure is normalized so that Gamma(phi, phi)(X) = E(phi, phi).  On a
cell C where phi is harmonic, Gamma(phi, phi)(C) is the renormalized energy of
the three corner values of C.  Integrals of f^2 against Gamma or against the
self-similar measure m are enclosed by bracketing f^2 on each cell between the
squares of its corner extremes, which is valid by the maximum principle as soon
as f is harmonic on the cell.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction

from . import kernels
from .energy import PHFunction, renormalization
from .errors import DepthTooShallow
from .geometry import CellAddress, Region


@dataclass(frozen=True)
class Enclosure:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty enclosure [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x) -> Enclosure:
        return cls(x, x)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def __add__(self, other: Enclosure) -> Enclosure:
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def scale(self, c) -> Enclosure:
        c = Fraction(c)
        if c >= 0:
            return Enclosure(self.lo * c, self.hi * c)
        return Enclosure(self.hi * c, self.lo * c)

    def __contains__(self, x) -> bool:
        return self.lo <= x <= self.hi

    def within(self, other: Enclosure) -> bool:
        return other.lo <= self.lo and self.hi <= other.hi

    def to_json(self) -> dict:
        return {"lo": fmt(self.lo), "hi": fmt(self.hi)}


def fmt(x: Fraction) -> str:
    x = Fraction(x)
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class CellMeasureTable:
    """Gamma(phi, phi)(C) for each level-``level`` cell C."""

    level: int
    entries: dict[CellAddress, Fraction]

    def total(self) -> Fraction:
        return sum(self.entries.values(), Fraction(0))

    def __getitem__(self, cell: CellAddress) -> Fraction:
        return self.entries[cell]


def _check_depth(depth: int, region: Region, *fns: PHFunction) -> None:
    if depth > region.level:
        raise DepthTooShallow(f"depth {depth} is above the region level {region.level}")
    for f in fns:
        if depth > f.m_def:
            raise DepthTooShallow(f"depth {depth} is above the definition level {f.m_def} of {f.name or 'function'}")


@functools.lru_cache(maxsize=256)
def gamma_weights(phi: PHFunction, region: Region, depth: int):
    """Integer per-cell energies of phi at `depth` and their common denominator.

    Cached per (function, region, depth); the returned array must not be mutated.
    """
    table = phi.corner_table(region, depth)
    return kernels.cell_energy(table.ints), table.scale**2


def gamma_cells(phi: PHFunction, region: Region, m: int) -> CellMeasureTable:
    _check_depth(m, region, phi)
    w, den = gamma_weights(phi, region, m)
    factor = renormalization(m) / den
    return CellMeasureTable(m, {c: int(x) * factor for c, x in zip(region.subcells(m), w)})


def polarized_edge_sum(f: PHFunction, phi: PHFunction, region: Region, m: int) -> Fraction:
    """(5/3)^(-m) * sum over level-m edges of (f(p)^2 + f(q)^2)(phi(p) - phi(q))^2."""
    ft = f.corner_table(region, m)
    pt = phi.corner_table(region, m)
    total = kernels.polarized_sum(ft.ints, pt.ints)
    return Fraction(total, ft.scale**2 * pt.scale**2) * renormalization(m)


def integral_f2_dgamma(f: PHFunction, phi: PHFunction, region: Region, depth: int) -> Enclosure:
    """Enclosure of the integral of f^2 d Gamma(phi, phi) over the region."""
    _check_depth(depth, region, f, phi)
    w, wden = gamma_weights(phi, region, depth)
    ft = f.corner_table(region, depth)
    lo, hi = kernels.weighted_square_bounds(ft.ints, w)
    factor = renormalization(depth) / (wden * ft.scale**2)
    return Enclosure(lo * factor, hi * factor)


def integral_f2_dm(f: PHFunction, region: Region, depth: int) -> Enclosure:
    """Enclosure of the integral of f^2 dm over the region."""
    _check_depth(depth, region, f)
    ft = f.corner_table(region, depth)
    lo, hi = kernels.square_bound_sums(ft.ints)
    factor = Fraction(3) ** depth / ft.scale**2
    return Enclosure(lo * factor, hi * factor)


def integral_f_dm(f: PHFunction, region: Region) -> Fraction:
    """Exact integral of f dm: a harmonic cell contributes its measure times the corner mean."""
    level = min(region.level, f.m_def)
    ft = f.corner_table(region, level)
    total = sum(ft.ints.ravel().tolist())
    return Fraction(total, 3 * ft.scale) * Fraction(3) ** level


def edge_polarization(fp, fq, pp, pq) -> tuple[Fraction, Fraction]:
    """Both sides of the single-edge identity
    2(phi_p f_p^2 - phi_q f_q^2)(phi_p - phi_q) - (phi_p^2 - phi_q^2)(f_p^2 - f_q^2) = (f_p^2 + f_q^2)(phi_p - phi_q)^2.
    """
    fp, fq, pp, pq = (Fraction(x) for x in (fp, fq, pp, pq))
    lhs = 2 * (pp * fp**2 - pq * fq**2) * (pp - pq) - (pp**2 - pq**2) * (fp**2 - fq**2)
    return lhs, (fp**2 + fq**2) * (pp - pq) ** 2
