"""Command-line front end.

Exit codes: 0 all instances pass, 2 usage error, 3 geometry or window error,
4 verification failure (reports are still written).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import kernels
from .cutoff import ball_cutoff, cell_cutoff
from .energy import PHFunction, dirichlet_energy
from .errors import DepthTooShallow, DomainError, GasketError, GeometryError
from .geometry import CellAddress, Region, neighborhood
from .measure import fmt
from .serialize import (
    REPORT_VERSION,
    decimal_str,
    dumps,
    function_from_json,
    function_to_json,
    parse_fraction,
    parse_point,
)
from .verify import (
    SUITE_KINDS,
    CmsEstimate,
    canonical_cell,
    check_cell_lemma,
    check_css,
    default_depth,
    dyadic_exponent,
    estimate_cms,
    recheck_instance,
    suite,
    sweep_balls,
    vd_probe,
)

EXIT_OK, EXIT_USAGE, EXIT_GEOMETRY, EXIT_FAIL = 0, 2, 3, 4
MAX_SEED = 2**64 - 1


class UsageError(Exception):
    pass


# --------------------------------------------------------------------------
# argument parsing helpers


def _fraction(text: str) -> Fraction:
    try:
        return parse_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _seed(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if not 0 <= value <= MAX_SEED:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def _int_list(text: str) -> list[int]:
    """'a:b' (inclusive range) or 'a,b,c'."""
    try:
        if ":" in text:
            lo, hi = (int(x) for x in text.split(":"))
            if lo > hi:
                raise ValueError
            return list(range(lo, hi + 1))
        out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad integer range: {text!r}") from exc
    if not out:
        raise argparse.ArgumentTypeError("empty range")
    return out


def _fraction_list(text: str) -> list[Fraction]:
    return [_fraction(x) for x in text.split(",") if x.strip()]


def _point(text: str):
    try:
        return parse_point(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"bad point {text!r}; use 'origin' or 'a,b'") from exc


def _config(args: argparse.Namespace) -> dict:
    skip = {"func", "out", "backend"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key in skip:
            continue
        if isinstance(value, Fraction):
            value = fmt(value)
        elif isinstance(value, list):
            value = [fmt(v) if isinstance(v, Fraction) else v for v in value]
        elif hasattr(value, "key"):
            value = value.key()
        out[key] = value
    return out


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cms(args: argparse.Namespace) -> tuple[Fraction, dict]:
    if args.cms is not None:
        return args.cms, {"cms": fmt(args.cms), "cms_source": "given"}
    est: CmsEstimate = estimate_cms(args.cms_levels, args.cms_samples, args.seed)
    return est.value, {"cms": fmt(est.value), "cms_source": "estimate", "cms_estimate": est.to_json()}


def _report(args, constants: dict, reports) -> tuple[dict, bool]:
    instances = [r.to_json() for r in reports]
    ok = all(r.passed for r in reports)
    ratios = [r.ratio for r in reports if r.ratio is not None]
    summary = {
        "count": len(reports),
        "passed": sum(r.passed for r in reports),
        "failed": sum(not r.passed for r in reports),
        "min_slack": fmt(min(r.slack for r in reports)) if reports else None,
        "max_ratio": fmt(max(ratios)) if ratios else None,
    }
    doc = {
        "version": REPORT_VERSION,
        "config": _config(args),
        "constants": constants,
        "instances": instances,
        "summary": summary,
    }
    return doc, ok


def _summary_line(doc: dict) -> str:
    s = doc["summary"]
    return f"{s['passed']}/{s['count']} pass; min slack {s['min_slack']}; max ratio {s['max_ratio']}\n"


def _finish_report(args, doc: dict, ok: bool) -> int:
    text = dumps(doc)
    if args.out:
        _emit(text, args.out)
        sys.stdout.write(_summary_line(doc))
    else:
        sys.stdout.write(text)
    return EXIT_OK if ok else EXIT_FAIL


def _require_dyadic(args, radii) -> None:
    if args.allow_nondyadic:
        return
    for r in radii:
        if dyadic_exponent(r) is None:
            raise UsageError(f"r={fmt(r)} is not a power of two; pass --allow-nondyadic")


def _unit_cell(window: int) -> CellAddress:
    return CellAddress(window, "1" * window)


# --------------------------------------------------------------------------
# subcommands


def cmd_energy(args) -> int:
    if args.kind == "file":
        if not args.path:
            raise UsageError("energy file needs --path")
        with open(args.path, encoding="utf-8") as fh:
            f = function_from_json(json.load(fh))
        region = f.support
    elif args.kind == "phiK":
        window = args.window if args.window is not None else args.n + 4
        cell = _builtin_cell(args.n, window, args.corner)
        f = cell_cutoff(cell)
        region = f.support
    else:
        window = args.window if args.window is not None else 4
        region = Region((_unit_cell(window),))
        if args.kind == "const":
            f = PHFunction.constant(region, args.c)
        else:
            if len(args.corners) != 3:
                raise UsageError("--corners needs three values")
            corners = dict(zip(region.cells[0].corners(), args.corners))
            f = PHFunction(region, region.level, corners, name="harmonic")
    e = dirichlet_energy(f, region)
    _emit(dumps({"energy": fmt(e.value), "stabilized_at": e.stabilized_at}), args.out)
    return EXIT_OK


def _builtin_cell(n: int, window: int, corner: bool) -> CellAddress:
    if corner:
        if window < n:
            raise GeometryError(f"level {n} is above window {window}")
        return CellAddress(window, "1" * (window - n))
    return canonical_cell(n, window)


def _cell_arg(args) -> CellAddress:
    if args.word is not None:
        return CellAddress(args.window, args.word)
    if args.n is None:
        raise UsageError("give --word or --n")
    return _builtin_cell(args.n, args.window, args.corner)


def cmd_cutoff_cell(args) -> int:
    cell = _cell_arg(args)
    phi = cell_cutoff(cell)
    e = dirichlet_energy(phi, phi.support)
    doc = {
        "cell": cell.word,
        "level": cell.level,
        "neighborhood": phi.support.words(),
        "energy": fmt(e.value),
        "function": function_to_json(phi),
    }
    _emit(dumps(doc), args.out)
    return EXIT_OK


def cmd_cutoff_ball(args) -> int:
    _require_dyadic(args, [args.r])
    phi = ball_cutoff(args.x0, args.r, args.window)
    ball = phi.ball
    region = ball.enlarged
    part_energies = [dirichlet_energy(p, p.support).value for p in phi.parts]
    bound = sum(part_energies, Fraction(0))
    levels = []
    for m in range(phi.m_def, phi.m_def - args.levels - 1, -1):
        e = phi.graph_energy(region, m)
        levels.append({"m": m, "energy": fmt(e), "within_bound": e <= bound})
    doc = {
        "x0": args.x0.key(),
        "r": fmt(args.r),
        "n": ball.n,
        "center": ball.center.word,
        "parts": [p.word for p in ball.inner],
        "enlarged": region.words(),
        "covered": ball.covered,
        "part_energies": [fmt(e) for e in part_energies],
        "energy_bound": fmt(bound),
        "graph_energies": levels,
    }
    _emit(dumps(doc), args.out)
    return EXIT_OK if all(row["within_bound"] for row in levels) else EXIT_FAIL


def cmd_estimate_cms(args) -> int:
    est = estimate_cms(args.levels, args.samples, args.seed, extremal=args.extremal)
    doc = {"version": REPORT_VERSION, "config": _config(args), "estimate": est.to_json()}
    _emit(dumps(doc), args.out)
    return EXIT_OK


def _depth(args, f: PHFunction, n: int) -> int:
    if args.depth is not None:
        return args.depth
    return default_depth(f, n, offset=args.depth_offset)


def cmd_check_lemma22(args) -> int:
    if args.word is not None or args.n is not None:
        cells = [_cell_arg(args)]
    else:
        cells = [canonical_cell(n, args.window) for n in args.levels]
    cms, constants = _cms(args)
    reports = []
    for cell in cells:
        region = neighborhood(cell)
        for f in suite(args.suite, region, args.seed, args.count):
            reports.append(check_cell_lemma(cell, f, cms, _depth(args, f, cell.level)))
    doc, ok = _report(args, constants, reports)
    return _finish_report(args, doc, ok)


def _css_balls(args) -> list:
    if args.x0 is not None or args.r is not None:
        if args.x0 is None or args.r is None:
            raise UsageError("--x0 and --r go together")
        return [(args.x0, args.r)]
    return sweep_balls(args.levels, args.balls, args.seed, args.window)


def cmd_check_css(args) -> int:
    balls = _css_balls(args)
    _require_dyadic(args, [r for _, r in balls])
    cms, constants = _cms(args)
    reports = []
    for x0, r in balls:
        phi = ball_cutoff(x0, r, args.window)
        region = phi.ball.enlarged
        for f in suite(args.suite, region, args.seed, args.count):
            reports.append(check_css(x0, r, f, cms, _depth(args, f, phi.ball.n), cutoff=phi))
    doc, ok = _report(args, constants, reports)
    return _finish_report(args, doc, ok)


def cmd_vd_probe(args) -> int:
    _require_dyadic(args, args.radii)
    rows = vd_probe(args.x0, args.radii, args.window, args.depth_offset)
    out = []
    for row in rows:
        out.append({
            "r": fmt(row["r"]),
            "depth": row["depth"],
            "V_r": row["V_r"].to_json(),
            "V_2r": row["V_2r"].to_json(),
            "ratio": row["ratio"].to_json(),
        })
    worst = max((row["ratio"].hi for row in rows), default=None)
    doc = {
        "version": REPORT_VERSION,
        "config": _config(args),
        "rows": out,
        "max_ratio_upper": None if worst is None else fmt(worst),
    }
    _emit(dumps(doc), args.out)
    return EXIT_OK


CSV_COLUMNS = ("instance", "n", "r", "lhs_upper", "rhs_lower", "ratio", "depth", "enclosure_width")


def cmd_sweep(args) -> int:
    cms, _ = _cms(args)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    ok = True
    idx = 0
    if args.claim == "lemma":
        jobs = []
        for n in args.levels:
            cell = canonical_cell(n, args.window)
            fns = suite(args.suite, neighborhood(cell), args.seed, args.count)
            jobs.append((n, "", [(f, lambda f, d, cell=cell: check_cell_lemma(cell, f, cms, d)) for f in fns]))
    else:
        balls = sweep_balls(args.levels, len(args.levels), args.seed, args.window)
        _require_dyadic(args, [r for _, r in balls])
        jobs = []
        for x0, r in balls:
            phi = ball_cutoff(x0, r, args.window)
            fns = suite(args.suite, phi.ball.enlarged, args.seed, args.count)
            jobs.append((phi.ball.n, fmt(r),
                         [(f, lambda f, d, x0=x0, r=r, phi=phi: check_css(x0, r, f, cms, d, cutoff=phi, direct=False))
                          for f in fns]))
    for n, r, items in jobs:
        for f, run in items:
            for offset in args.depth_offsets:
                report = run(f, default_depth(f, n, offset=offset))
                ok &= report.passed
                ratio = report.ratio
                writer.writerow([
                    idx,
                    n,
                    r,
                    fmt(report.lhs_upper),
                    fmt(report.rhs_lower),
                    "" if ratio is None else decimal_str(ratio),
                    report.depth,
                    fmt(report.widths["f2_dgamma"]),
                ])
                idx += 1
    _emit(buf.getvalue(), args.out)
    return EXIT_OK if ok else EXIT_FAIL


def cmd_recheck(args) -> int:
    try:
        with open(args.report, encoding="utf-8") as fh:
            doc = json.load(fh)
        cms = parse_fraction(doc["constants"]["cms"])
        instances = doc["instances"]
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read report: {exc}") from exc
    bad = 0
    for i, inst in enumerate(instances):
        ok, msg = recheck_instance(inst, cms)
        if not ok:
            bad += 1
            sys.stdout.write(f"instance {i}: {msg}\n")
    sys.stdout.write(f"rechecked {len(instances)} instances; {len(instances) - bad} pass\n")
    return EXIT_OK if bad == 0 else EXIT_FAIL


# --------------------------------------------------------------------------
# parser


def _add_cms_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--cms", type=_fraction, default=None, help="use this constant instead of estimating it")
    p.add_argument("--cms-levels", type=_int_list, default=[-1, 0, 1], help="levels for the inline estimate")
    p.add_argument("--cms-samples", type=int, default=70, help="random samples per level for the inline estimate")


def _add_suite_args(p: argparse.ArgumentParser, count: int = 20) -> None:
    p.add_argument("--suite", choices=SUITE_KINDS, default="mixed")
    p.add_argument("--count", type=int, default=count, help="functions per cell or ball")
    p.add_argument("--seed", type=_seed, default=0, help="64-bit unsigned seed")
    p.add_argument("--depth", type=int, default=None, help="fixed refinement level (default: m_def minus offset)")
    p.add_argument("--depth-offset", type=int, default=6)


def _add_cell_args(p: argparse.ArgumentParser, window_default: int | None) -> None:
    p.add_argument("--window", type=int, default=window_default, help="window level N (the window is 2^N K)")
    p.add_argument("--word", default=None, help="cell address over {1,2,3}")
    p.add_argument("--n", type=int, default=None, help="level of a built-in cell")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--interior", action="store_true", help="built-in cell away from the origin (default)")
    g.add_argument("--corner", action="store_true", help="built-in cell at the origin")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gasket-css", description="Exact energy and cutoff Sobolev checks on the Sierpinski gasket.")
    parser.add_argument("--backend", action="store_true", help="print the kernel backend and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("energy", help="exact Dirichlet energy of a built-in or file function")
    p.add_argument("kind", choices=("phiK", "const", "harmonic", "file"))
    p.add_argument("--path", default=None, help="function file (kind=file)")
    p.add_argument("--n", type=int, default=0)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--interior", action="store_true")
    g.add_argument("--corner", action="store_true")
    p.add_argument("--c", type=_fraction, default=Fraction(1))
    p.add_argument("--corners", type=_fraction_list, default=[Fraction(1), Fraction(0), Fraction(0)])
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("cutoff-cell", help="the cutoff of one cell and its energy")
    _add_cell_args(p, 6)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cutoff_cell)

    p = sub.add_parser("cutoff-ball", help="the ball cutoff and its energy against the parts")
    p.add_argument("--x0", type=_point, required=True)
    p.add_argument("--r", type=_fraction, required=True)
    p.add_argument("--window", type=int, default=6)
    p.add_argument("--levels", type=int, default=6, help="graph-energy levels below m_def to compare")
    p.add_argument("--allow-nondyadic", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_cutoff_ball)

    p = sub.add_parser("estimate-cms", help="certified lower bound for the Morrey-Sobolev constant")
    p.add_argument("--levels", type=_int_list, default=[-1, 0, 1])
    p.add_argument("--samples", type=int, default=70, help="random samples per level")
    p.add_argument("--extremal", type=int, default=3, help="potential candidates per level")
    p.add_argument("--seed", type=_seed, default=0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_estimate_cms)

    p = sub.add_parser("check-lemma22", help="cell-cutoff inequality over a function suite")
    _add_cell_args(p, 7)
    p.add_argument("--levels", type=_int_list, default=list(range(-3, 4)), help="levels of the default cells")
    _add_suite_args(p)
    _add_cms_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check_lemma22)

    p = sub.add_parser("check-css", help="cutoff Sobolev inequality on balls over a function suite")
    p.add_argument("--x0", type=_point, default=None)
    p.add_argument("--r", type=_fraction, default=None)
    p.add_argument("--window", type=int, default=7)
    p.add_argument("--levels", type=_int_list, default=list(range(-3, 4)), help="ball levels for the default sweep")
    p.add_argument("--balls", type=int, default=20, help="balls in the default sweep")
    p.add_argument("--allow-nondyadic", action="store_true")
    _add_suite_args(p)
    _add_cms_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_check_css)

    p = sub.add_parser("vd-probe", help="volume doubling ratio enclosures")
    p.add_argument("--x0", type=_point, default=parse_point("origin"))
    p.add_argument("--radii", type=_fraction_list, default=[Fraction(1, 2), Fraction(1), Fraction(2)])
    p.add_argument("--window", type=int, default=5)
    p.add_argument("--depth-offset", type=int, default=4)
    p.add_argument("--allow-nondyadic", action="store_true")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_vd_probe)

    p = sub.add_parser("sweep", help="CSV of ratios and enclosure widths")
    p.add_argument("--claim", choices=("lemma", "css"), default="lemma")
    p.add_argument("--levels", type=_int_list, default=list(range(-4, 5)))
    p.add_argument("--depth-offsets", type=_int_list, default=[6])
    p.add_argument("--window", type=int, default=None, help="default: max level + 4")
    p.add_argument("--allow-nondyadic", action="store_true")
    p.add_argument("--suite", choices=SUITE_KINDS, default="constants")
    p.add_argument("--count", type=int, default=3)
    p.add_argument("--seed", type=_seed, default=0)
    _add_cms_args(p)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("recheck", help="re-verify a JSON report from its rationals")
    p.add_argument("report")
    p.set_defaults(func=cmd_recheck)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.backend:
        print(kernels.backend())
        return EXIT_OK
    if args.command is None:
        parser.print_help()
        return EXIT_USAGE
    if getattr(args, "window", 0) is None and args.command == "sweep":
        args.window = max(args.levels) + 4
    for name in ("count", "balls", "samples", "cms_samples"):
        if getattr(args, name, 1) < 1:
            parser.error(f"--{name.replace('_', '-')} must be positive")
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except GeometryError as exc:
        sys.stderr.write(f"geometry error: {exc}\n")
        return EXIT_GEOMETRY
    except (DepthTooShallow, DomainError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except GasketError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
