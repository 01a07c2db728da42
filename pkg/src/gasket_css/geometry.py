"""Exact geometry of the unbounded Sierpinski gasket.

Points are stored in the lattice basis e1 = (1, 0), e2 = (1/2, sqrt(3)/2), so a
point (a, b) sits at a*e1 + b*e2 and every vertex of every level has dyadic
rational coordinates.  Squared distances are the rational quadratic form
a^2 + a*b + b^2; no irrational arithmetic is ever needed.

The unbounded gasket is represented through a finite *window*, the cell
2^N * K anchored at the origin.  A cell is a word over {1, 2, 3} inside the
window; its level is N - len(word).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .errors import BallNotCovered, GeometryError, PointOutsideWindow, WindowTooSmall

Rational = Fraction


def _q(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def pow2(k: int) -> Fraction:
    return Fraction(2) ** k


@dataclass(frozen=True, order=True, slots=True)
class LatticePoint:
    a: Fraction
    b: Fraction

    def __post_init__(self):
        object.__setattr__(self, "a", _q(self.a))
        object.__setattr__(self, "b", _q(self.b))

    def __add__(self, other: LatticePoint) -> LatticePoint:
        return LatticePoint(self.a + other.a, self.b + other.b)

    def __sub__(self, other: LatticePoint) -> LatticePoint:
        return LatticePoint(self.a - other.a, self.b - other.b)

    def scaled(self, c) -> LatticePoint:
        return LatticePoint(self.a * c, self.b * c)

    def midpoint(self, other: LatticePoint) -> LatticePoint:
        return LatticePoint((self.a + other.a) / 2, (self.b + other.b) / 2)

    def norm2(self) -> Fraction:
        return self.a * self.a + self.a * self.b + self.b * self.b

    def cartesian(self) -> tuple[float, float]:
        """Float Cartesian coordinates, for plotting only."""
        return (float(self.a + self.b / 2), float(self.b) * math.sqrt(3) / 2)

    def level(self) -> int:
        """Largest level m with this point on the lattice 2^m Z^2."""
        if self.a == 0 and self.b == 0:
            raise ValueError("the origin is a vertex of every level")
        return min(_dyadic_valuation(self.a), _dyadic_valuation(self.b))

    def key(self) -> str:
        return f"{self.a.numerator}/{self.a.denominator},{self.b.numerator}/{self.b.denominator}"

    @classmethod
    def from_key(cls, text: str) -> LatticePoint:
        a, b = text.split(",")
        return cls(Fraction(a), Fraction(b))


def _dyadic_valuation(x: Fraction) -> int:
    if x == 0:
        return 10**9
    num, den = x.numerator, x.denominator
    if den & (den - 1):
        raise ValueError(f"{x} is not dyadic")
    if den > 1:
        return -(den.bit_length() - 1)
    return (num & -num).bit_length() - 1


ORIGIN = LatticePoint(0, 0)


def dist2(p: LatticePoint, q: LatticePoint) -> Fraction:
    """Exact squared Euclidean distance."""
    return (p - q).norm2()


def _dot(u: LatticePoint, v: LatticePoint) -> Fraction:
    return u.a * v.a + (u.a * v.b + u.b * v.a) / 2 + u.b * v.b


def segment_dist2(p: LatticePoint, s: LatticePoint, t: LatticePoint) -> Fraction:
    d = t - s
    lam = _dot(p - s, d) / d.norm2()
    lam = min(max(lam, Fraction(0)), Fraction(1))
    return dist2(p, s + d.scaled(lam))


def triangle_dist2(p: LatticePoint, origin: LatticePoint, side: Fraction) -> Fraction:
    """Squared distance from p to the closed upright triangle with given corner and side."""
    da, db = p.a - origin.a, p.b - origin.b
    if da >= 0 and db >= 0 and da + db <= side:
        return Fraction(0)
    c1 = origin + LatticePoint(side, 0)
    c2 = origin + LatticePoint(0, side)
    return min(segment_dist2(p, origin, c1), segment_dist2(p, origin, c2), segment_dist2(p, c1, c2))


@dataclass(frozen=True, order=True, slots=True)
class CellAddress:
    """A cell of the window 2^window * K, addressed by a word over {1,2,3}."""

    window: int
    word: str = ""

    def __post_init__(self):
        if self.word.strip("123"):
            raise ValueError(f"invalid cell word {self.word!r}")

    @property
    def level(self) -> int:
        return self.window - len(self.word)

    @property
    def side(self) -> Fraction:
        return pow2(self.level)

    @property
    def origin(self) -> LatticePoint:
        a = b = Fraction(0)
        for t, letter in enumerate(self.word, start=1):
            if letter == "2":
                a += pow2(self.window - t)
            elif letter == "3":
                b += pow2(self.window - t)
        return LatticePoint(a, b)

    def corners(self) -> tuple[LatticePoint, LatticePoint, LatticePoint]:
        o, s = self.origin, self.side
        return (o, LatticePoint(o.a + s, o.b), LatticePoint(o.a, o.b + s))

    def children(self) -> tuple[CellAddress, CellAddress, CellAddress]:
        return tuple(CellAddress(self.window, self.word + i) for i in "123")

    def parent(self) -> CellAddress:
        if not self.word:
            raise WindowTooSmall("the window cell has no parent inside the window")
        return CellAddress(self.window, self.word[:-1])

    def ancestor(self, level: int) -> CellAddress:
        if level < self.level or level > self.window:
            raise ValueError(f"no ancestor of a level-{self.level} cell at level {level}")
        return CellAddress(self.window, self.word[: self.window - level])

    def subcells(self, level: int) -> Iterator[CellAddress]:
        """Level-`level` subcells in lexicographic address order."""
        k = self.level - level
        if k < 0:
            raise ValueError("subcell level above the cell level")
        for tail in itertools.product("123", repeat=k):
            yield CellAddress(self.window, self.word + "".join(tail))

    def is_origin_anchored(self) -> bool:
        return not self.word.strip("1")

    def hull_contains(self, p: LatticePoint) -> bool:
        o, s = self.origin, self.side
        da, db = p.a - o.a, p.b - o.b
        return da >= 0 and db >= 0 and da + db <= s

    def contains_cell(self, other: CellAddress) -> bool:
        return other.window == self.window and other.word.startswith(self.word)

    def __str__(self) -> str:
        return f"{self.word or '<root>'}@{self.window}"


def cell_corners(cell: CellAddress) -> tuple[LatticePoint, LatticePoint, LatticePoint]:
    return cell.corners()


def children(cell: CellAddress) -> tuple[CellAddress, CellAddress, CellAddress]:
    return cell.children()


def window_exits(window: int) -> tuple[LatticePoint, LatticePoint]:
    """The two window corners through which the unbounded gasket continues."""
    s = pow2(window)
    return (LatticePoint(s, 0), LatticePoint(0, s))


@dataclass(frozen=True)
class Region:
    """Finite union of distinct cells of one level inside one window."""

    cells: tuple[CellAddress, ...]

    def __post_init__(self):
        cells = tuple(sorted(set(self.cells)))
        if not cells:
            raise ValueError("empty region")
        if len({c.level for c in cells}) != 1 or len({c.window for c in cells}) != 1:
            raise ValueError("region cells must share one level and one window")
        object.__setattr__(self, "cells", cells)

    @classmethod
    def of(cls, cells: Iterable[CellAddress]) -> Region:
        return cls(tuple(cells))

    @property
    def level(self) -> int:
        return self.cells[0].level

    @property
    def window(self) -> int:
        return self.cells[0].window

    def __len__(self) -> int:
        return len(self.cells)

    def __iter__(self):
        return iter(self.cells)

    def __contains__(self, cell: CellAddress) -> bool:
        return cell in self.cells

    def covers(self, cell: CellAddress) -> bool:
        """True when `cell` lies inside the union of the region cells."""
        if cell.level <= self.level:
            return cell.ancestor(self.level) in self.cells
        return all(sub in self.cells for sub in cell.subcells(self.level))

    def subcells(self, level: int) -> Iterator[CellAddress]:
        for c in self.cells:
            yield from c.subcells(level)

    def measure(self) -> Fraction:
        return len(self.cells) * Fraction(3) ** self.level

    def refined(self, level: int) -> Region:
        return Region(tuple(self.subcells(level)))

    def corner_points(self) -> set[LatticePoint]:
        return {p for c in self.cells for p in c.corners()}

    def boundary_points(self) -> set[LatticePoint]:
        """Region vertices shared with a same-level cell outside the region."""
        count: dict[LatticePoint, int] = {}
        for c in self.cells:
            for p in c.corners():
                count[p] = count.get(p, 0) + 1
        return {p for p, k in count.items() if k < (1 if p == ORIGIN else 2)}

    def words(self) -> list[str]:
        return [c.word for c in self.cells]


def measure(region: Region) -> Fraction:
    return region.measure()


def vertices(region: Region, m: int) -> set[LatticePoint]:
    if m > region.level:
        raise ValueError("vertex level above the region level")
    return {p for c in region.subcells(m) for p in c.corners()}


def edges(region: Region, m: int) -> set[tuple[LatticePoint, LatticePoint]]:
    if m > region.level:
        raise ValueError("edge level above the region level")
    out = set()
    for c in region.subcells(m):
        p = c.corners()
        for i, j in ((0, 1), (0, 2), (1, 2)):
            out.add((min(p[i], p[j]), max(p[i], p[j])))
    return out


def _check_in_window(p: LatticePoint, window: int) -> None:
    if not CellAddress(window).hull_contains(p):
        raise PointOutsideWindow(f"point {p.key()} is outside the window 2^{window} K")


def cells_containing(p: LatticePoint, level: int, window: int) -> list[CellAddress]:
    """All level-`level` cells of the window containing p, sorted by address."""
    _check_in_window(p, window)
    if level > window:
        raise WindowTooSmall(f"level {level} exceeds window level {window}")
    frontier = [CellAddress(window)]
    for _ in range(window - level):
        frontier = [ch for c in frontier for ch in c.children() if ch.hull_contains(p)]
    return sorted(frontier)


def locate_cell(p: LatticePoint, n: int, window: int) -> CellAddress:
    """A level-n cell containing p; the lexicographically smallest on ties."""
    found = cells_containing(p, n, window)
    if not found:
        raise PointOutsideWindow(f"point {p.key()} is not on the gasket")
    return found[0]


def neighborhood(cell: CellAddress) -> Region:
    """The cell together with every same-level cell meeting it."""
    exits = window_exits(cell.window)
    cells = {cell}
    for v in cell.corners():
        if v == ORIGIN:
            continue
        if v in exits:
            raise WindowTooSmall(f"neighborhood of {cell} leaves the window")
        cells.update(cells_containing(v, cell.level, cell.window))
    return Region(tuple(cells))


def scale_level(r: Fraction) -> int:
    """The integer n with 2^(n-1) <= r < 2^n."""
    r = _q(r)
    if r <= 0:
        raise ValueError("radius must be positive")
    n = r.numerator.bit_length() - r.denominator.bit_length()
    while pow2(n - 1) > r:
        n -= 1
    while pow2(n) <= r:
        n += 1
    return n


def require_ball_in_window(x0: LatticePoint, radius: Fraction, window: int) -> None:
    """Raise unless B(x0, radius) misses every point of the gasket outside the window."""
    _check_in_window(x0, window)
    r2 = _q(radius) ** 2
    s = pow2(window)
    # the two window-sized cells glued at the exits; anything further out is
    # at distance >= (sqrt(3)/2) * 2^window from the window
    for o in (LatticePoint(s, 0), LatticePoint(0, s)):
        if triangle_dist2(x0, o, s) < r2:
            raise WindowTooSmall(f"ball of radius {radius} around {x0.key()} leaves the window")
    if 4 * r2 > 3 * s * s:
        raise WindowTooSmall(f"radius {radius} too large for window {window}")


def cells_meeting_ball(x0: LatticePoint, r2: Fraction, level: int, window: int) -> list[CellAddress]:
    """Level-`level` cells whose convex hull meets the open ball of squared radius r2."""
    out = []
    stack = [CellAddress(window)]
    while stack:
        c = stack.pop()
        if triangle_dist2(x0, c.origin, c.side) >= r2:
            continue
        if c.level == level:
            out.append(c)
        else:
            stack.extend(c.children())
    return sorted(out)


def ball_measure_bounds(x0: LatticePoint, r: Fraction, depth: int, window: int) -> tuple[Fraction, Fraction]:
    """Inner and outer cell-count bounds for m(B(x0, r)) using cells down to `depth`."""
    r = _q(r)
    require_ball_in_window(x0, r, window)
    r2 = r * r
    lo = hi = Fraction(0)
    stack = [CellAddress(window)]
    while stack:
        c = stack.pop()
        if triangle_dist2(x0, c.origin, c.side) >= r2:
            continue
        m = Fraction(3) ** c.level
        if all(dist2(x0, p) < r2 for p in c.corners()):
            lo += m
            hi += m
        elif c.level == depth:
            hi += m
        else:
            stack.extend(c.children())
    return lo, hi


@dataclass(frozen=True)
class BallCells:
    """Cells used to build the cutoff for B(x0, r) inside B(x0, 8r)."""

    x0: LatticePoint
    r: Fraction
    n: int
    center: CellAddress
    inner: Region
    parts: tuple[Region, ...]
    enlarged: Region
    covered: bool


def ball_cells(x0: LatticePoint, r, window: int, n: int | None = None, require_cover: bool = True) -> BallCells:
    """Neighborhood N(K) of the level-n cell K holding x0, and the union of N(K~) for K~ in N(K).

    ``covered`` records an exact check that every level-n cell whose hull meets
    B(x0, r) belongs to N(K).  The check fails for some non-dyadic radii close
    to 2^n (the Euclidean gap across a hole is only sqrt(3)/2 * 2^n); with
    ``require_cover`` this raises :class:`BallNotCovered`.
    """
    r = _q(r)
    if n is None:
        n = scale_level(r)
    elif not (pow2(n - 1) <= r < pow2(n)):
        raise ValueError(f"r={r} is not in [2^{n - 1}, 2^{n})")
    center = locate_cell(x0, n, window)
    inner = neighborhood(center)
    parts = tuple(neighborhood(k) for k in inner)
    enlarged = Region(tuple(c for part in parts for c in part))
    outer2 = 64 * r * r
    for p in enlarged.corner_points():
        if dist2(x0, p) >= outer2:
            raise GeometryError(f"neighborhood point {p.key()} not inside B(x0, 8r)")
    covered = all(c in inner for c in cells_meeting_ball(x0, r * r, n, window))
    if require_cover and not covered:
        raise BallNotCovered(f"B({x0.key()}, {r}) is not contained in N({center})")
    return BallCells(x0, r, n, center, inner, parts, enlarged, covered)
