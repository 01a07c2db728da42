"""Per-instance certificates for the cell-cutoff lemma and CSS(d_w).

Every verdict is decided by one exact rational comparison
``lhs_upper <= rhs_lower``.  The left side is the upper end of an enclosure,
the right side is built from exact energies and lower ends of enclosures, so a
pass certifies the inequality for that cutoff and test function.

The Morrey-Sobolev constant has no published value; :func:`estimate_cms`
returns a certified *lower* bound of the supremum of the Morrey-Sobolev
ratio over sampled functions.  A smaller constant only shrinks the right side,
so checks run with the estimate are conservative with respect to the true
constant.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
from mpmath import iv as _iv_default

from .cutoff import MaxPHFunction, ball_cutoff, cell_cutoff
from .energy import PHFunction, dirichlet_energy
from .errors import DegenerateFunction, DepthTooShallow, GeometryError
from .geometry import (
    CellAddress,
    LatticePoint,
    Region,
    ball_measure_bounds,
    dist2,
    neighborhood,
    require_ball_in_window,
    scale_level,
    vertices,
)
from .measure import Enclosure, fmt, integral_f2_dgamma, integral_f2_dm, polarized_edge_sum

D_H = math.log(3) / math.log(2)
D_W = math.log(5) / math.log(2)


@dataclass(frozen=True)
class Constants:
    d_h: float = D_H
    d_w: float = D_W
    two_pow_dh: int = 3
    two_pow_dw: int = 5
    two_pow_gap: Fraction = Fraction(5, 3)
    lemma_energy: Fraction = Fraction(200, 3)
    lemma_mass: Fraction = Fraction(24)
    css_energy: Fraction = Fraction(800, 3)
    css_mass: Fraction = Fraction(96)
    max_parts: int = 4


CONSTANTS = Constants()

_PREC = 96


def _iv_context(prec: int):
    ctx = type(_iv_default)()
    ctx.prec = prec
    return ctx


iv = _iv_context(_PREC)
_IV_FINE = _iv_context(2 * _PREC)


def _mpf_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    v = Fraction(int(man)) * Fraction(2) ** int(exp)
    return -v if sign else v


def _iv_bounds(x) -> tuple[Fraction, Fraction]:
    lo, hi = x._mpi_
    return _mpf_to_fraction(lo), _mpf_to_fraction(hi)


def dyadic_exponent(r: Fraction) -> int | None:
    """k with r == 2^k, or None."""
    r = Fraction(r)
    if r <= 0:
        return None
    n, d = r.numerator, r.denominator
    if n & (n - 1) or d & (d - 1):
        return None
    return (n.bit_length() - 1) - (d.bit_length() - 1)


def _iv_frac(x: Fraction):
    return iv.mpf(x.numerator) / x.denominator


def r_dw_bounds(r) -> tuple[Fraction, Fraction]:
    """Rational enclosure of r^d_w; exact 5^k for r = 2^k."""
    r = Fraction(r)
    k = dyadic_exponent(r)
    if k is not None:
        v = Fraction(5) ** k
        return v, v
    x = iv.exp(iv.log(_iv_frac(r)) * iv.log(5) / iv.log(2))
    return _iv_bounds(x)


def distance_factor_bounds(d2) -> tuple[Fraction, Fraction]:
    """Rational enclosure of d^(d_w - d_h) given the exact squared distance d2."""
    d2 = Fraction(d2)
    k = dyadic_exponent(d2)
    if k is not None and k % 2 == 0:
        v = CONSTANTS.two_pow_gap ** (k // 2)
        return v, v
    gap = iv.log(iv.mpf(5) / 3) / iv.log(2)
    x = iv.exp(gap * iv.log(_iv_frac(d2)) / 2)
    return _iv_bounds(x)


# --------------------------------------------------------------------------
# random test functions


_DENOMS = (1, 2, 3, 4, 6, 8, 12)


def random_rational(rng: random.Random, bound: int = 2) -> Fraction:
    d = rng.choice(_DENOMS)
    return Fraction(rng.randint(-bound * d, bound * d), d)


def _rng(seed, *tags) -> random.Random:
    return random.Random(":".join(str(t) for t in (seed, *tags)))


def _relative_order(points, origin: LatticePoint, side: Fraction) -> list[LatticePoint]:
    return sorted(points, key=lambda p: ((p.a - origin.a) / side, (p.b - origin.b) / side))


def random_function(region: Region, m_def: int, rng: random.Random, name: str = "", compact: bool = False,
                    anchor: CellAddress | None = None) -> PHFunction:
    """Random rational values at level m_def; zero on the region boundary if ``compact``.

    Vertices are visited in an order relative to ``anchor`` (default: the first
    region cell), so equal seeds give transported copies of one function on
    self-similar configurations.
    """
    anchor = anchor or region.cells[0]
    pts = _relative_order(vertices(region, m_def), anchor.origin, anchor.side)
    boundary = region.boundary_points() if compact else set()
    values = {p: (Fraction(0) if p in boundary else random_rational(rng)) for p in pts}
    return PHFunction(region, m_def, values, name)


SUITE_KINDS = ("constants", "harmonic", "rough", "cutoffs", "products", "bumps", "mixed")
_MIXED = ("constants", "harmonic", "rough", "rough", "cutoffs", "products", "bumps")


def _cutoff_candidates(region: Region) -> list[CellAddress]:
    out = []
    for k in range(3):
        for c in region.subcells(region.level - k):
            try:
                neighborhood(c)
            except GeometryError:
                continue
            out.append(c)
    return out


def _suite_member(kind: str, region: Region, seed, i: int) -> PHFunction:
    rng = _rng(seed, kind, i)
    lvl = region.level
    if kind == "constants":
        fixed = (Fraction(0), Fraction(1), Fraction(-7, 3))
        c = fixed[i] if i < len(fixed) else random_rational(rng)
        return PHFunction.constant(region, c, name=f"const {fmt(c)}")
    if kind == "harmonic":
        return random_function(region, lvl, rng, name=f"harmonic #{i}")
    if kind == "rough":
        k = 1 + i % 3
        return random_function(region, lvl - k, rng, name=f"rough k={k} #{i}")
    if kind == "bumps":
        return random_function(region, lvl - 1 - i % 2, rng, name=f"bump #{i}", compact=True)
    cands = _cutoff_candidates(region)
    if kind == "cutoffs":
        cell = cands[rng.randrange(len(cands))]
        phi = cell_cutoff(cell)
        m = min(lvl, cell.level)
        values = {p: phi(p) for p in vertices(region, m)}
        return PHFunction(region, m, values, name=f"cutoff {cell.word}")
    if kind == "products":
        first = cands[rng.randrange(len(cands))]
        near = [c for c in neighborhood(first) if c != first and c in cands]
        a = cell_cutoff(first)
        b = cell_cutoff(near[rng.randrange(len(near))] if near else first)
        m = min(lvl - 1, a.m_def, b.m_def)
        values = {p: a(p) * b(p) for p in vertices(region, m)}
        return PHFunction(region, m, values, name=f"product {a.name}*{b.name}")
    raise ValueError(f"unknown suite kind {kind!r}")


def suite(kind: str, region: Region, seed, count: int) -> list[PHFunction]:
    """Deterministic family of test functions defined on ``region``."""
    if kind not in SUITE_KINDS:
        raise ValueError(f"unknown suite kind {kind!r}; choose from {', '.join(SUITE_KINDS)}")
    out = []
    seen: dict[str, int] = {}
    for i in range(count):
        k = _MIXED[i % len(_MIXED)] if kind == "mixed" else kind
        j = seen.get(k, 0)
        seen[k] = j + 1
        out.append(_suite_member(k, region, seed, j))
    return out


# --------------------------------------------------------------------------
# Morrey-Sobolev constant


def canonical_cell(n: int, window: int) -> CellAddress:
    """Interior level-n cell; levels n and n-1 are images of each other under g_1."""
    base = "213"
    pad = window - n - len(base)
    if pad < 0:
        raise DepthTooShallow(f"window {window} too small for a canonical level-{n} cell")
    return CellAddress(window, "1" * pad + base)


def ms_ratio(f: PHFunction, x: LatticePoint, y: LatticePoint, region: Region) -> Enclosure:
    """|f(x) - f(y)|^2 / (d(x,y)^(d_w - d_h) * energy of f on region)."""
    energy = dirichlet_energy(f, region).value
    if energy == 0:
        raise DegenerateFunction("zero energy")
    num = (f(x) - f(y)) ** 2
    lo, hi = distance_factor_bounds(dist2(x, y))
    return Enclosure(num / (hi * energy), num / (lo * energy))


@dataclass
class CmsEstimate:
    value: Fraction
    samples: int
    scales: list[int]
    per_level: dict[int, Fraction] = field(default_factory=dict)
    skipped: int = 0

    def to_json(self) -> dict:
        return {
            "value": fmt(self.value),
            "samples": self.samples,
            "scales": self.scales,
            "per_level": {str(k): fmt(v) for k, v in sorted(self.per_level.items())},
            "skipped": self.skipped,
            "note": "certified lower bound of the sampled Morrey-Sobolev ratio supremum",
        }


_GRID = 10**9


def _best_pair_ratio(f: PHFunction, region: Region, level: int, energy: Fraction, top: int = 3) -> Fraction:
    vals = f.vertex_values(region, level)
    pts = list(vals)
    xy = np.array([p.cartesian() for p in pts])
    fv = np.array([float(vals[p]) for p in pts])
    i, j = np.triu_indices(len(pts), k=1)
    d = np.hypot(*(xy[i] - xy[j]).T)
    gap = math.log(5 / 3) / math.log(2)
    approx = (fv[i] - fv[j]) ** 2 / d**gap
    best = Fraction(0)
    for k in np.argsort(approx)[::-1][:top]:
        p, q = pts[i[k]], pts[j[k]]
        _, hi = distance_factor_bounds(dist2(p, q))
        best = max(best, (vals[p] - vals[q]) ** 2 / (hi * energy))
    return best


def potential_functions(region: Region, m: int, count: int) -> list[PHFunction]:
    """Near-extremal candidates: unit potentials between the pairs of level-m vertices
    with the largest effective resistance relative to d^(d_w - d_h).

    Potentials are solved in floating point and rounded to rationals, so each
    candidate is an honest element of the function class and its ratio is exact.
    """
    pts = sorted(vertices(region, m))
    index = {p: i for i, p in enumerate(pts)}
    lap = np.zeros((len(pts), len(pts)))
    for c in region.subcells(m):
        corners = [index[p] for p in c.corners()]
        for i, j in ((0, 1), (0, 2), (1, 2)):
            a, b = corners[i], corners[j]
            lap[a, a] += 1
            lap[b, b] += 1
            lap[a, b] -= 1
            lap[b, a] -= 1
    green = np.linalg.pinv(lap)
    diag = np.diag(green)
    resistance = diag[:, None] + diag[None, :] - 2 * green
    xy = np.array([p.cartesian() for p in pts])
    d = np.hypot(xy[:, None, 0] - xy[None, :, 0], xy[:, None, 1] - xy[None, :, 1])
    gap = math.log(5 / 3) / math.log(2)
    score = np.where(d > 0, resistance / np.where(d > 0, d, 1) ** gap, -1.0)
    i, j = np.triu_indices(len(pts), k=1)
    order = np.lexsort((j, i, -np.round(score[i, j], 12)))
    out = []
    for k in order[:count]:
        a, b = i[k], j[k]
        current = np.zeros(len(pts))
        current[a], current[b] = 1.0, -1.0
        pot = green @ current
        pot = (pot - pot[b]) / (pot[a] - pot[b])
        values = {p: Fraction(round(float(v) * 2**20), 2**20) for p, v in zip(pts, pot)}
        out.append(PHFunction(region, m, values, name=f"potential {pts[a].key()} -> {pts[b].key()}"))
    return out


def estimate_cms(levels: Sequence[int], samples_per_level: int, seed, window: int | None = None,
                 extremal: int = 3) -> CmsEstimate:
    """Lower bound for the Morrey-Sobolev constant on N(K).

    For a canonical interior cell K of each level n, test functions are
    ``samples_per_level`` random functions with values at level n-2, plus
    ``extremal`` near-optimal potentials (see :func:`potential_functions`).
    Each ratio is maximized over vertex pairs of level n-3 and certified as a
    lower bound with outward-rounded distance factors.
    """
    if samples_per_level < 1:
        raise ValueError("need at least one sample per level")
    levels = sorted(set(levels))
    window = window if window is not None else max(levels) + 4
    per_level: dict[int, Fraction] = {}
    skipped = 0
    for n in levels:
        cell = canonical_cell(n, window)
        region = neighborhood(cell)
        candidates = [random_function(region, n - 2, _rng(seed, "cms", s), anchor=cell)
                      for s in range(samples_per_level)]
        if extremal:
            candidates += potential_functions(region, n - 2, extremal)
        best = Fraction(0)
        for f in candidates:
            energy = dirichlet_energy(f, region).value
            if energy == 0:
                skipped += 1
                continue
            best = max(best, _best_pair_ratio(f, region, n - 3, energy))
        per_level[n] = best
    top = max(per_level.values())
    value = Fraction(math.floor(top * _GRID), _GRID)
    return CmsEstimate(value, (samples_per_level + extremal) * len(levels), levels, per_level, skipped)


# --------------------------------------------------------------------------
# inequality reports


@dataclass
class InequalityReport:
    claim: str
    params: dict
    function: str
    lhs_upper: Fraction
    rhs_lower: Fraction
    depth: int
    widths: dict[str, Fraction]
    components: dict
    diagnostics: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.lhs_upper <= self.rhs_lower

    @property
    def verdict(self) -> str:
        return "pass" if self.passed else "fail"

    @property
    def ratio(self) -> Fraction | None:
        if self.rhs_lower == 0:
            return None
        return self.lhs_upper / self.rhs_lower

    @property
    def slack(self) -> Fraction:
        return self.rhs_lower - self.lhs_upper

    def to_json(self) -> dict:
        def enc(v):
            if isinstance(v, Fraction):
                return fmt(v)
            if isinstance(v, (list, tuple)):
                return [enc(x) for x in v]
            if isinstance(v, dict):
                return {k: enc(x) for k, x in v.items()}
            return v

        ratio = self.ratio
        return {
            "claim": self.claim,
            "params": enc(self.params),
            "function": self.function,
            "lhs_upper": fmt(self.lhs_upper),
            "rhs_lower": fmt(self.rhs_lower),
            "ratio": None if ratio is None else fmt(ratio),
            "verdict": self.verdict,
            "depth": self.depth,
            "widths": enc(self.widths),
            "components": enc(self.components),
            "diagnostics": enc(self.diagnostics),
        }


def lemma_rhs(cms: Fraction, energy: Fraction, f2dm_lo: Fraction, measure: Fraction, n: int) -> Fraction:
    return CONSTANTS.lemma_energy * cms * energy + CONSTANTS.lemma_mass * Fraction(3, 5) ** n * f2dm_lo / measure


def css_rhs(cms: Fraction, energy: Fraction, f2dm_lo: Fraction, r_dw_upper: Fraction) -> Fraction:
    return CONSTANTS.css_energy * cms * energy + CONSTANTS.css_mass * f2dm_lo / r_dw_upper


def default_depth(f: PHFunction, *levels: int, offset: int = 6) -> int:
    return min(f.m_def, *levels) - offset


def check_cell_lemma(cell: CellAddress, f: PHFunction, cms, depth: int | None = None) -> InequalityReport:
    """Cell-cutoff inequality for phi_K against f on N(K)."""
    cms = Fraction(cms)
    phi = cell_cutoff(cell)
    region = phi.support
    n = cell.level
    if depth is None:
        depth = default_depth(f, n)
    lhs = integral_f2_dgamma(f, phi, region, depth)
    energy = dirichlet_energy(f, region).value
    mass = integral_f2_dm(f, region, depth)
    measure = region.measure()
    rhs = lemma_rhs(cms, energy, mass.lo, measure, n)
    return InequalityReport(
        claim="cell-lemma",
        params={"window": cell.window, "cell": cell.word, "n": n, "neighborhood_cells": len(region)},
        function=f.name,
        lhs_upper=lhs.hi,
        rhs_lower=rhs,
        depth=depth,
        widths={"f2_dgamma": lhs.width, "f2_dm": mass.width},
        components={"cms": cms, "energy": energy, "f2dm_lo": mass.lo, "measure": measure, "gamma_hi": lhs.hi},
        diagnostics={"lhs_lower": lhs.lo},
    )


def check_css(x0: LatticePoint, r, f: PHFunction, cms, depth: int | None = None, window: int | None = None,
              cutoff: MaxPHFunction | None = None, direct: bool = True) -> InequalityReport:
    """CSS(d_w) for the ball cutoff of B(x0, r) against f on the cutoff's support.

    The left side is bounded through Gamma(phi) <= sum of Gamma(phi_K~); the
    right side uses integrals over the union of the N(K~), which lies inside
    B(x0, 8r), so it is a lower bound of the right side over the ball.
    """
    r = Fraction(r)
    cms = Fraction(cms)
    if cutoff is None:
        cutoff = ball_cutoff(x0, r, f.window if window is None else window)
    ball = cutoff.ball
    n = ball.n
    region = ball.enlarged
    if depth is None:
        depth = default_depth(f, n)
    parts = [integral_f2_dgamma(f, part, part.support, depth) for part in cutoff.parts]
    lhs_upper = sum((p.hi for p in parts), Fraction(0))
    energy = dirichlet_energy(f, region).value
    mass = integral_f2_dm(f, region, depth)
    rdw_lo, rdw_hi = r_dw_bounds(r)
    rhs = css_rhs(cms, energy, mass.lo, rdw_hi)
    diagnostics = {"lhs_parts_lower": sum((p.lo for p in parts), Fraction(0))}
    if direct:
        diagnostics["lhs_direct_estimate"] = polarized_edge_sum(f, cutoff, region, depth) / 2
    return InequalityReport(
        claim="css",
        params={
            "window": ball.center.window,
            "x0": ball.x0.key(),
            "r": r,
            "n": n,
            "center_cell": ball.center.word,
            "parts": len(cutoff.parts),
            "region_cells": len(region),
        },
        function=f.name,
        lhs_upper=lhs_upper,
        rhs_lower=rhs,
        depth=depth,
        widths={"f2_dgamma": sum((p.width for p in parts), Fraction(0)), "f2_dm": mass.width},
        components={
            "cms": cms,
            "energy": energy,
            "f2dm_lo": mass.lo,
            "r_dw_upper": rdw_hi,
            "part_hi": [p.hi for p in parts],
        },
        diagnostics=diagnostics,
    )


def recheck_instance(inst: dict, cms: Fraction | None = None) -> tuple[bool, str]:
    """Re-derive a serialized verdict from its rationals alone."""
    q = Fraction
    comp = inst["components"]
    c = q(comp["cms"])
    if cms is not None and c != cms:
        return False, "constant differs from the report header"
    if inst["claim"] == "cell-lemma":
        lhs = q(comp["gamma_hi"])
        rhs = lemma_rhs(c, q(comp["energy"]), q(comp["f2dm_lo"]), q(comp["measure"]), int(inst["params"]["n"]))
    elif inst["claim"] == "css":
        lhs = sum((q(x) for x in comp["part_hi"]), Fraction(0))
        r = q(inst["params"]["r"])
        bound = q(comp["r_dw_upper"])
        k = dyadic_exponent(r)
        if k is not None:
            if bound != Fraction(5) ** k:
                return False, "r^d_w differs from the exact dyadic value"
        else:
            fine = _IV_FINE
            x = fine.mpf(r.numerator) / r.denominator
            if not bound >= _iv_bounds(fine.exp(fine.log(x) * fine.log(5) / fine.log(2)))[1]:
                return False, "r^d_w upper bound is not an upper bound"
        rhs = css_rhs(c, q(comp["energy"]), q(comp["f2dm_lo"]), bound)
    else:
        return False, f"unknown claim {inst['claim']!r}"
    if lhs != q(inst["lhs_upper"]) or rhs != q(inst["rhs_lower"]):
        return False, "serialized sides do not match their components"
    ok = lhs <= rhs
    if ok != (inst["verdict"] == "pass"):
        return False, "verdict does not match the comparison"
    return ok, "pass" if ok else "fail"


def sweep_balls(levels: Sequence[int], count: int, seed, window: int) -> list[tuple[LatticePoint, Fraction]]:
    """Deterministic dyadic balls B(x0, 2^(n-1)), cycling through ``levels``.

    The first ball is centered at the origin; the others at a random corner of
    a random level-(n-2) cell inside the first level-(window-1) cell.
    """
    levels = list(levels)
    out = []
    for i in range(count):
        n = levels[i % len(levels)]
        if i == 0:
            x0 = LatticePoint(0, 0)
        else:
            rng = _rng(seed, "ball", i)
            word = "1" + "".join(rng.choice("123") for _ in range(window - 1 - (n - 2)))
            x0 = CellAddress(window, word).corners()[rng.randrange(3)]
        out.append((x0, Fraction(2) ** (n - 1)))
    return out


# --------------------------------------------------------------------------
# volume doubling probe


def vd_probe(x0: LatticePoint, radii: Sequence, window: int, depth_offset: int = 6) -> list[dict]:
    """Enclosures of V(x0, 2r) / V(x0, r) from inner/outer cell coverings."""
    rows = []
    for r in radii:
        r = Fraction(r)
        require_ball_in_window(x0, 2 * r, window)
        depth = scale_level(r) - depth_offset
        v1 = Enclosure(*ball_measure_bounds(x0, r, depth, window))
        v2 = Enclosure(*ball_measure_bounds(x0, 2 * r, depth, window))
        if v1.lo == 0:
            raise DepthTooShallow(f"no cell of level {depth} fits inside B(x0, {r})")
        ratio = Enclosure(v2.lo / v1.hi, v2.hi / v1.lo)
        rows.append({"r": r, "depth": depth, "V_r": v1, "V_2r": v2, "ratio": ratio})
    return rows
