"""Graph energies, harmonic extension and piecewise-harmonic functions.

A :class:`PHFunction` carries exact rational values on the level-``m_def``
vertices of its support region.  Below ``m_def`` it is extended harmonically
by the 2/5-2/5-1/5 rule, so every finite-level graph energy is exact and the
Dirichlet energy equals the level-``m_def`` graph energy.

Bulk evaluation goes through *corner tables*: an integer array with one row
per cell of a region at a given level, holding the cell's three corner values
times a common denominator.  Rows follow lexicographic cell-address order, and
one harmonic refinement step maps row i to rows 3i, 3i+1, 3i+2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

import numpy as np

from . import kernels
from .errors import DomainError, StabilizationFailure
from .geometry import CellAddress, LatticePoint, Region, vertices

THREE_FIFTHS = Fraction(3, 5)


def harmonic_extend_cell(u1, u2, u3) -> tuple[Fraction, Fraction, Fraction]:
    """Midpoint values (m12, m13, m23) of the harmonic extension on one cell."""
    u1, u2, u3 = Fraction(u1), Fraction(u2), Fraction(u3)
    return ((2 * u1 + 2 * u2 + u3) / 5, (2 * u1 + 2 * u3 + u2) / 5, (2 * u2 + 2 * u3 + u1) / 5)


def renormalization(m: int) -> Fraction:
    """Energy weight (5/3)^(-m) for edges of level m."""
    return THREE_FIFTHS**m


@dataclass(frozen=True)
class CornerTable:
    """Corner values of every level-``level`` cell of ``region``, as ints / ``scale``."""

    region: Region
    level: int
    ints: np.ndarray
    scale: int

    def cells(self):
        return self.region.subcells(self.level)

    def fractions(self) -> list[tuple[Fraction, Fraction, Fraction]]:
        s = self.scale
        return [tuple(Fraction(int(v), s) for v in row) for row in self.ints]

    def rescaled(self, scale: int) -> np.ndarray:
        """Integer table at a multiple of the current scale."""
        k, rem = divmod(scale, self.scale)
        if rem:
            raise ValueError("target scale is not a multiple of the table scale")
        if k == 1:
            return self.ints
        return kernels.as_table((np.asarray(self.ints, dtype=object) * k).tolist())


def table_from_fractions(region: Region, level: int, rows) -> CornerTable:
    rows = [tuple(Fraction(v) for v in row) for row in rows]
    den = 1
    for row in rows:
        for v in row:
            den = math.lcm(den, v.denominator)
    ints = kernels.as_table([[int(v * den) for v in row] for row in rows])
    return CornerTable(region, level, ints, den)


def energy_of_table(table: CornerTable) -> Fraction:
    """Renormalized graph energy of the table's cells at the table level."""
    return Fraction(kernels.energy_total(table.ints), table.scale**2) * renormalization(table.level)


@dataclass(frozen=True, eq=False)
class PHFunction:
    """Piecewise-harmonic function: exact values at level ``m_def`` on ``support``.

    Functions whose values vanish on the boundary of the support are *compact*
    and are extended by zero to the whole gasket.  Other functions are only
    defined on their support; integrating them over a region that leaves the
    support raises :class:`DomainError`.
    """

    support: Region
    m_def: int
    values: Mapping[LatticePoint, Fraction]
    name: str = ""
    compact: bool = field(init=False)

    def __post_init__(self):
        if self.m_def > self.support.level:
            raise ValueError("definition level above the support level")
        vals = {p: Fraction(v) for p, v in self.values.items()}
        expected = vertices(self.support, self.m_def)
        if vals.keys() != expected:
            missing = len(expected - vals.keys())
            extra = len(vals.keys() - expected)
            raise ValueError(f"values must cover the support vertices exactly ({missing} missing, {extra} extra)")
        object.__setattr__(self, "values", vals)
        compact = all(vals[p] == 0 for p in self.support.boundary_points())
        object.__setattr__(self, "compact", compact)

    @property
    def window(self) -> int:
        return self.support.window

    @classmethod
    def from_callable(cls, support: Region, m_def: int, fn, name: str = "") -> PHFunction:
        return cls(support, m_def, {p: Fraction(fn(p)) for p in vertices(support, m_def)}, name)

    @classmethod
    def constant(cls, support: Region, c, name: str = "") -> PHFunction:
        c = Fraction(c)
        return cls.from_callable(support, support.level, lambda p: c, name or f"const {c}")

    def _support_cell(self, p: LatticePoint) -> CellAddress | None:
        for c in self.support.subcells(self.m_def):
            if c.hull_contains(p):
                return c
        return None

    def __call__(self, p: LatticePoint) -> Fraction:
        """Exact value at any gasket vertex."""
        v = self.values.get(p)
        if v is not None:
            return v
        cell = self._support_cell(p)
        if cell is None:
            if self.compact:
                return Fraction(0)
            raise DomainError(f"{self.name or 'function'} is not defined at {p.key()}")
        corners = cell.corners()
        vals = [self.values[q] for q in corners]
        while p not in corners:
            for i, child in enumerate(cell.children()):
                if child.hull_contains(p):
                    break
            else:
                raise DomainError(f"{p.key()} is not a gasket vertex")
            m12, m13, m23 = harmonic_extend_cell(*vals)
            vals = [(vals[0], m12, m13), (m12, vals[1], m23), (m13, m23, vals[2])][i]
            cell = child
            corners = cell.corners()
        return vals[corners.index(p)]

    def check_domain(self, region: Region) -> None:
        if region.window != self.window:
            raise DomainError("function and region live in different windows")
        if not self.compact and not all(self.support.covers(c) for c in region):
            raise DomainError(f"{self.name or 'function'} is not defined on the whole region")

    def corner_table(self, region: Region, level: int) -> CornerTable:
        """Corner values of every level-``level`` cell of ``region``."""
        if level > region.level:
            raise ValueError("table level above the region level")
        self.check_domain(region)
        start = min(region.level, max(self.m_def, level))
        if start >= self.m_def:
            get = self.values.get
            fill = Fraction(0)
            rows = [tuple(get(p, fill) for p in c.corners()) for c in region.subcells(start)]
        else:
            rows = [tuple(self(p) for p in c.corners()) for c in region.subcells(start)]
        table = table_from_fractions(region, start, rows)
        k = start - level
        if k == 0:
            return table
        return CornerTable(region, level, kernels.refine(table.ints, k), table.scale * 5**k)

    def vertex_values(self, region: Region, m: int) -> dict[LatticePoint, Fraction]:
        table = self.corner_table(region, m)
        out = {}
        for cell, row in zip(table.cells(), table.fractions()):
            out.update(zip(cell.corners(), row))
        return out

    def scaled(self, c) -> PHFunction:
        c = Fraction(c)
        return PHFunction(self.support, self.m_def, {p: c * v for p, v in self.values.items()}, self.name)


def extend_to_level(f: PHFunction, m: int) -> PHFunction:
    """Same function with values materialized at level m <= m_def."""
    if m > f.m_def:
        raise ValueError("can only extend to finer levels")
    if m == f.m_def:
        return f
    return PHFunction(f.support, m, f.vertex_values(f.support, m), f.name)


def graph_energy(f: PHFunction, region: Region, m: int) -> Fraction:
    """(5/3)^(-m) times the sum over level-m edges of the region of (f(p) - f(q))^2."""
    return energy_of_table(f.corner_table(region, m))


@dataclass(frozen=True)
class EnergyValue:
    value: Fraction
    stabilized_at: int


def dirichlet_energy(f: PHFunction, region: Region) -> EnergyValue:
    """Exact energy of f on the region, with a one-level-deeper stabilization check."""
    m = min(region.level, f.m_def)
    value = graph_energy(f, region, m)
    if graph_energy(f, region, m - 1) != value:
        raise StabilizationFailure(f"energy of {f.name or 'function'} changed below level {m}")
    return EnergyValue(value, m)
