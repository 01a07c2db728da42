"""JSON forms of points, functions and rationals ("num/den" strings, never floats)."""

from __future__ import annotations

import json
from decimal import Context, Decimal
from fractions import Fraction

from .energy import PHFunction
from .geometry import CellAddress, LatticePoint, Region
from .measure import fmt

REPORT_VERSION = 1

_DEC = Context(prec=17)


def parse_fraction(text) -> Fraction:
    return Fraction(str(text).strip())


def decimal_str(x: Fraction) -> str:
    """Lossy fixed-precision decimal rendering; deterministic across platforms."""
    x = Fraction(x)
    return format(_DEC.divide(Decimal(x.numerator), Decimal(x.denominator)), ".12g")


def parse_point(text: str) -> LatticePoint:
    if text.strip().lower() == "origin":
        return LatticePoint(0, 0)
    return LatticePoint.from_key(text.replace(" ", ""))


def function_to_json(f: PHFunction) -> dict:
    return {
        "window": f.window,
        "support": f.support.words(),
        "m_def": f.m_def,
        "values": {p.key(): fmt(v) for p, v in sorted(f.values.items())},
        "name": f.name,
    }


def function_from_json(data: dict) -> PHFunction:
    window = int(data["window"])
    support = Region(tuple(CellAddress(window, w) for w in data["support"]))
    values = {LatticePoint.from_key(k): parse_fraction(v) for k, v in data["values"].items()}
    return PHFunction(support, int(data["m_def"]), values, data.get("name", ""))


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"
