import csv
import io
import json
from fractions import Fraction

import pytest

from gasket_css.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.mark.parametrize("argv,energy", [
    (["energy", "phiK", "--n", "0", "--interior"], "6/1"),
    (["energy", "phiK", "--n", "2", "--interior"], "54/25"),
    (["energy", "const", "--c", "5"], "0/1"),
    (["energy", "harmonic", "--corners", "1,0,0"], "2/1"),
])
def test_energy_builtins(capsys, argv, energy):
    code, out, _ = run(capsys, *argv)
    assert code == 0
    assert json.loads(out)["energy"] == energy


def test_energy_from_file(capsys, tmp_path):
    code, out, _ = run(capsys, "cutoff-cell", "--window", "4", "--word", "1213")
    assert code == 0
    doc = json.loads(out)
    assert doc["energy"] == "6/1" and len(doc["neighborhood"]) == 4
    path = tmp_path / "phi.json"
    path.write_text(json.dumps(doc["function"]))
    code, out, _ = run(capsys, "energy", "file", "--path", str(path))
    assert code == 0 and json.loads(out)["energy"] == "6/1"


def test_geometry_error_exit(capsys):
    code, _, err = run(capsys, "cutoff-cell", "--window", "2", "--word", "22")
    assert code == 3
    assert "geometry" in err


def test_check_css_constants(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "check-css", "--x0", "origin", "--r", "1/2", "--suite", "constants",
                     "--count", "3", "--cms", "1", "--out", str(out))
    assert code == 0
    doc = json.loads(out.read_text())
    assert set(doc) >= {"version", "config", "constants", "instances"}
    assert doc["constants"]["cms"] == "1/1"
    assert [i["verdict"] for i in doc["instances"]] == ["pass"] * 3
    code, stdout, _ = run(capsys, "recheck", str(out))
    assert code == 0 and "3 pass" in stdout


def test_nondyadic_needs_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["check-css", "--x0", "origin", "--r", "3/5", "--suite", "constants", "--cms", "1"])
    assert exc.value.code == 2


def test_nondyadic_with_flag(capsys):
    code, out, _ = run(capsys, "check-css", "--x0", "1/2,1/2", "--r", "3/10", "--window", "4", "--suite", "constants",
                       "--count", "2", "--cms", "1", "--allow-nondyadic")
    assert code == 0
    assert json.loads(out)["instances"][1]["components"]["r_dw_upper"] != "0/1"


def test_bad_seed_and_range(capsys):
    for argv in (["sweep", "--seed", "-1"], ["sweep", "--levels", "3:1"], ["check-css", "--count", "0"]):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == 2


def test_failure_exit_still_writes_report(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run(capsys, "check-lemma22", "--n", "0", "--suite", "harmonic", "--count", "2",
                     "--cms", "-1000", "--out", str(out))
    assert code == 4
    doc = json.loads(out.read_text())
    assert doc["summary"]["failed"] > 0
    code, _, _ = run(capsys, "recheck", str(out))
    assert code == 4


def test_tampered_report_fails_recheck(capsys, tmp_path):
    out = tmp_path / "r.json"
    run(capsys, "check-lemma22", "--n", "0", "--suite", "rough", "--count", "2", "--cms", "1", "--out", str(out))
    doc = json.loads(out.read_text())
    doc["instances"][0]["components"]["energy"] = "1000000/1"
    out.write_text(json.dumps(doc))
    code, stdout, _ = run(capsys, "recheck", str(out))
    assert code == 4 and "instance 0" in stdout


def test_outputs_are_byte_deterministic(capsys, tmp_path):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        run(capsys, "check-css", "--levels=-1:0", "--balls", "3", "--count", "4", "--seed", "9",
            "--cms-samples", "3", "--cms-levels", "0", "--out", str(p))
    assert paths[0].read_bytes() == paths[1].read_bytes()
    csvs = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in csvs:
        run(capsys, "sweep", "--levels=-1:1", "--suite", "rough", "--count", "2", "--seed", "4", "--cms", "1",
            "--out", str(p))
    assert csvs[0].read_bytes() == csvs[1].read_bytes()


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_constants_ratio(capsys):
    code, out, _ = run(capsys, "sweep", "--levels=-4:4", "--suite", "constants", "--count", "3", "--cms", "1")
    assert code == 0
    rows = _rows(out)
    assert list(rows[0]) == ["instance", "n", "r", "lhs_upper", "rhs_lower", "ratio", "depth", "enclosure_width"]
    assert len(rows) == 27
    assert {r["ratio"] for r in rows if r["ratio"]} == {"0.25"}


def test_sweep_widths_decrease_with_depth(capsys):
    code, out, _ = run(capsys, "sweep", "--levels", "0", "--suite", "rough", "--count", "3",
                       "--depth-offsets", "2:8", "--cms", "1", "--seed", "1")
    assert code == 0
    rows = _rows(out)
    for k in range(0, len(rows), 7):
        widths = [Fraction(r["enclosure_width"]) for r in rows[k:k + 7]]
        depths = [int(r["depth"]) for r in rows[k:k + 7]]
        assert depths == sorted(depths, reverse=True)
        assert all(b < a for a, b in zip(widths, widths[1:]))


def test_css_sweep_csv(capsys):
    code, out, _ = run(capsys, "sweep", "--claim", "css", "--levels=-1:1", "--suite", "mixed", "--count", "3",
                       "--cms", "1", "--seed", "2")
    assert code == 0
    rows = _rows(out)
    assert {r["r"] for r in rows} == {"1/4", "1/2", "1/1"}


def test_vd_probe_and_cutoff_ball(capsys):
    code, out, _ = run(capsys, "vd-probe", "--radii", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["rows"][0]["ratio"]["hi"] == "81/25"
    code, out, _ = run(capsys, "cutoff-ball", "--x0", "1/2,1/2", "--r", "1/4", "--window", "4", "--levels", "3")
    assert code == 0
    doc = json.loads(out)
    assert doc["n"] == -1 and len(doc["parts"]) == 4
    assert all(row["within_bound"] for row in doc["graph_energies"])


def test_estimate_cms_cli(capsys):
    code, out, _ = run(capsys, "estimate-cms", "--levels", "0", "--samples", "4", "--seed", "3")
    assert code == 0
    est = json.loads(out)["estimate"]
    assert est["samples"] == 7 and est["scales"] == [0]
