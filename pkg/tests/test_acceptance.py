"""Acceptance criteria 1-9, one PASS/FAIL line each.

Run alone with ``pytest tests/test_acceptance.py -v`` or ``python tests/test_acceptance.py``.
"""

import json
import random
import sys
from fractions import Fraction

import pytest

from gasket_css.cli import main
from gasket_css.cutoff import ball_cutoff, cell_cutoff
from gasket_css.energy import PHFunction, dirichlet_energy, graph_energy, harmonic_extend_cell
from gasket_css.errors import WindowTooSmall
from gasket_css.geometry import CellAddress, Region, dist2, neighborhood, vertices
from gasket_css.measure import edge_polarization, integral_f2_dgamma, integral_f2_dm
from gasket_css.verify import (
    canonical_cell,
    check_cell_lemma,
    estimate_cms,
    random_function,
    random_rational,
    recheck_instance,
    suite,
    sweep_balls,
)

LEVELS = range(-3, 4)
SEED = 20240601


@pytest.fixture
def report(request):
    reporter = request.config.pluginmanager.get_plugin("terminalreporter")

    def emit(number, ok, detail):
        line = f"[acceptance {number}] {'PASS' if ok else 'FAIL'}: {detail}"
        if reporter is not None:
            reporter.write_line("")
            reporter.write_line(line)
        else:
            print(line)
        assert ok, line

    return emit


@pytest.fixture(scope="module")
def cms_estimate():
    return estimate_cms([-1, 0, 1], 70, SEED)


def test_1_cutoff_energy_identity(report):
    checked = 0
    bad = []
    for n in range(-6, 7):
        window = n + 4
        for cell in CellAddress(window).subcells(n):
            if cell.is_origin_anchored():
                continue
            try:
                phi = cell_cutoff(cell)
            except WindowTooSmall:
                continue
            checked += 1
            if dirichlet_energy(phi, phi.support).value != 6 * Fraction(3, 5) ** n:
                bad.append(cell)
    report(1, not bad and checked > 0, f"E(phi_K) = 6 (3/5)^n exactly for {checked} interior cells, n in [-6, 6]")


def test_2_harmonic_extension(report):
    ok = harmonic_extend_cell(1, 0, 0) == (Fraction(2, 5), Fraction(2, 5), Fraction(1, 5))
    rng = random.Random(SEED)
    unit = Region((CellAddress(2, "11"),))
    for _ in range(100):
        u = [random_rational(rng) for _ in range(3)]
        f = PHFunction(unit, 0, dict(zip(unit.cells[0].corners(), u)))
        energies = {graph_energy(f, unit, -k) for k in range(7)}
        ok &= len(energies) == 1
    region = neighborhood(CellAddress(3, "1213"))
    for i in range(100):
        m = -1 - i % 3
        f = random_function(region, m - 1, rng)
        coarse = PHFunction(region, m, {p: f.values[p] for p in vertices(region, m)})
        ok &= graph_energy(f, region, m - 1) >= graph_energy(coarse, region, m)
    report(2, ok, "(1,0,0) -> (2/5,2/5,1/5); 100 harmonic conserve energy over 6 levels; 100 refinements monotone")


def test_3_polarization_identity(report):
    rng = random.Random(SEED)
    mismatches = 0
    for _ in range(1000):
        lhs, rhs = edge_polarization(*(random_rational(rng, 3) for _ in range(4)))
        mismatches += lhs != rhs
    report(3, mismatches == 0, f"per-edge polarization identity exact on 1000 quadruples ({mismatches} mismatches)")


def test_4_markov_route(report):
    ok = True
    levels_checked = 0
    balls = sweep_balls(LEVELS, 20, SEED, 7)
    for x0, r in balls:
        phi = ball_cutoff(x0, r, 7)
        region = phi.ball.enlarged
        bound = sum((dirichlet_energy(p, p.support).value for p in phi.parts), Fraction(0))
        for m in range(phi.m_def, phi.m_def - 7, -1):
            ok &= phi.graph_energy(region, m) <= bound
            levels_checked += 1
    report(4, ok, f"energy of the max <= sum over parts on {len(balls)} ball cutoffs, {levels_checked} (ball, level) pairs")


def test_5_css_sweep(report, tmp_path, capsys):
    out = tmp_path / "css.json"
    code = main(["check-css", "--seed", str(SEED), "--balls", "20", "--count", "20", "--cms-samples", "70",
                 "--out", str(out)])
    doc = json.loads(out.read_text())
    cms = doc["constants"]["cms"]
    est = doc["constants"]["cms_estimate"]
    instances = doc["instances"]
    balls = {(i["params"]["x0"], i["params"]["r"]) for i in instances}
    levels = {i["params"]["n"] for i in instances}
    per_ball = min(sum(1 for i in instances if (i["params"]["x0"], i["params"]["r"]) == b) for b in balls)
    rechecked = sum(recheck_instance(i, Fraction(cms))[0] for i in instances)
    recheck_code = main(["recheck", str(out)])
    capsys.readouterr()
    ok = (
        code == 0
        and recheck_code == 0
        and est["samples"] >= 200
        and len(est["scales"]) >= 3
        and len(balls) >= 20
        and levels == set(LEVELS)
        and per_ball >= 20
        and all(i["verdict"] == "pass" for i in instances)
        and rechecked == len(instances)
    )
    report(5, ok, f"{len(instances)} CSS instances on {len(balls)} dyadic balls, n in [-3, 3], all pass; "
                  f"C_MS estimate {cms} from {est['samples']} samples; recheck {rechecked}/{len(instances)}; "
                  f"max ratio {doc['summary']['max_ratio']}")


def _lemma_cells(window):
    cells = []
    for n in LEVELS:
        cells.append(canonical_cell(n, window))
        cells.append(CellAddress(window, "1" * (window - n)))
        rng = random.Random(f"{SEED}:cell:{n}")
        while True:
            word = "1" + "".join(rng.choice("123") for _ in range(window - n - 1))
            if word.strip("1"):
                break
        cells.append(CellAddress(window, word))
    return cells


def test_6_cell_lemma(report, cms_estimate):
    cms = cms_estimate.value
    cells = _lemma_cells(7)
    total = passed = rechecked = calibrated = 0
    calibration_ok = True
    for cell in cells:
        for f in suite("mixed", neighborhood(cell), SEED, 20):
            rep = check_cell_lemma(cell, f, cms)
            total += 1
            passed += rep.passed
            rechecked += recheck_instance(json.loads(json.dumps(rep.to_json())), cms)[0]
            if f.name.startswith("const") and rep.lhs_upper and not cell.is_origin_anchored():
                calibrated += 1
                calibration_ok &= rep.ratio == Fraction(1, 4)
    ok = passed == total == rechecked and calibration_ok and calibrated > 0
    report(6, ok, f"{passed}/{total} cell-lemma instances pass on {len(cells)} cells; "
                  f"{calibrated} nonzero constants give ratio exactly 1/4")


def test_7_cms_scale_stability(report, cms_estimate):
    per = cms_estimate.per_level
    levels = sorted(per)
    diffs = [abs(per[a] - per[b]) / max(per[a], per[b]) for a, b in zip(levels, levels[1:])]
    worst = max(diffs)
    values = ", ".join(f"n={n}: {float(per[n]):.9f}" for n in levels)
    report(7, worst <= Fraction(5, 100), f"C_MS estimates {values}; worst adjacent relative gap {float(worst):.3g}")


def test_8_geometry(report):
    ok = True
    count = 0
    nb = {3: 0, 4: 0}
    window = 2
    for depth in range(7):
        for cell in CellAddress(window).subcells(window - depth):
            n = cell.level
            c = cell.corners()
            ok &= all(dist2(c[i], c[j]) == Fraction(4) ** n for i, j in ((0, 1), (0, 2), (1, 2)))
            ok &= Region((cell,)).measure() == Fraction(3) ** n
            count += 1
            try:
                k = len(neighborhood(cell))
            except WindowTooSmall:
                continue
            ok &= k == (3 if cell.is_origin_anchored() else 4)
            nb[k] += 1
    report(8, ok, f"diameter^2 = 4^n and measure = 3^n on {count} cells; neighborhoods: {nb[3]} of size 3, {nb[4]} of size 4")


def test_9_enclosure_nesting(report):
    ok = True
    ratios = []
    cell = canonical_cell(0, 5)
    region = neighborhood(cell)
    phi = cell_cutoff(cell)
    fns = [f for f in suite("rough", region, SEED, 10)]
    for f in fns:
        prev = None
        for depth in range(f.m_def - 1, f.m_def - 8, -1):
            encs = (integral_f2_dgamma(f, phi, region, depth), integral_f2_dm(f, region, depth))
            if prev is not None:
                ok &= all(e.within(p) and e.width <= p.width for e, p in zip(encs, prev))
                if prev[0].width:
                    ratios.append(encs[0].width / prev[0].width)
            prev = encs
    mean = sum(ratios) / len(ratios)
    report(9, ok and len(fns) == 10, f"10 (f, phi) pairs nest over 7 depths; mean width ratio per level {float(mean):.4f}")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-v"]))
