"""Cell cutoffs phi_K and ball cutoffs max_K~ phi_K~."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .energy import CornerTable, PHFunction, energy_of_table
from .geometry import BallCells, CellAddress, LatticePoint, Region, ball_cells, neighborhood, vertices
from .measure import CellMeasureTable, gamma_cells


def cell_cutoff(cell: CellAddress) -> PHFunction:
    """1 on the cell, harmonic on each neighbor with 0 at its far corners, 0 elsewhere."""
    nbhd = neighborhood(cell)
    inside = set(vertices(Region((cell,)), cell.level))
    values = {p: Fraction(1 if p in inside else 0) for p in vertices(nbhd, cell.level)}
    return PHFunction(nbhd, cell.level, values, name=f"phi[{cell.word}]")


@dataclass(frozen=True, eq=False)
class MaxPHFunction:
    """Pointwise maximum of compactly supported piecewise-harmonic functions."""

    parts: tuple[PHFunction, ...]
    ball: BallCells | None = None

    def __post_init__(self):
        if not self.parts:
            raise ValueError("need at least one part")
        if not all(p.compact for p in self.parts):
            raise ValueError("parts must vanish outside their supports")
        object.__setattr__(self, "parts", tuple(self.parts))

    @property
    def m_def(self) -> int:
        return min(p.m_def for p in self.parts)

    @property
    def window(self) -> int:
        return self.parts[0].window

    def support(self) -> Region:
        level = max(p.support.level for p in self.parts)
        cells = set()
        for p in self.parts:
            cells.update(c.ancestor(level) for c in p.support)
        return Region(tuple(cells))

    def __call__(self, p: LatticePoint) -> Fraction:
        return max(part(p) for part in self.parts)

    def corner_table(self, region: Region, level: int) -> CornerTable:
        tables = [p.corner_table(region, level) for p in self.parts]
        scale = math.lcm(*(t.scale for t in tables))
        ints = tables[0].rescaled(scale)
        for t in tables[1:]:
            ints = np.maximum(ints, t.rescaled(scale))
        return CornerTable(region, level, ints, scale)

    def graph_energy(self, region: Region, m: int) -> Fraction:
        return energy_of_table(self.corner_table(region, m))


def ball_cutoff(x0: LatticePoint, r, window: int) -> MaxPHFunction:
    """Cutoff for B(x0, r) inside B(x0, 8r): the max of phi_K~ over K~ in N(K)."""
    cells = ball_cells(x0, Fraction(r), window)
    return MaxPHFunction(tuple(cell_cutoff(k) for k in cells.inner), ball=cells)


def markov_bound_table(phi: MaxPHFunction, m: int, region: Region | None = None) -> CellMeasureTable:
    """Per-cell upper bounds sum_parts Gamma(phi_K~, phi_K~)(C) for Gamma(phi, phi)(C)."""
    if region is None:
        region = phi.support()
    entries: dict[CellAddress, Fraction] = {}
    for part in phi.parts:
        for cell, val in gamma_cells(part, region, m).entries.items():
            entries[cell] = entries.get(cell, Fraction(0)) + val
    return CellMeasureTable(m, entries)
