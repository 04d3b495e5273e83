import csv
import io
import json
import subprocess
import sys

import pytest

from gwmajority.cli import main, parse_range
from gwmajority.fixed_points import read_table_csv
from gwmajority.montecarlo import SimResult
from gwmajority.simplex import read_trajectory_csv


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    assert parse_range("4..8") == [4, 5, 6, 7, 8]
    assert parse_range("3,5,9") == [3, 5, 9]
    assert parse_range("7") == [7]
    assert parse_range("2,6..8") == [2, 6, 7, 8]


@pytest.mark.parametrize("argv", [["table", "--even", "9..4"], ["iterate", "--dist", "nary:3"], ["bogus"], []])
def test_usage_errors_exit_64(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 64


def test_iterate_converges(capsys):
    code, out, _ = run(capsys, "iterate", "--dist", "nary:3", "--p", "0,0.45,0.45,0.10", "--tol", "1e-10")
    assert code == 0
    rows = read_trajectory_csv(io.StringIO(out))
    assert rows[-1] == pytest.approx([0.2, 0.4, 0.4, 0.0], abs=1e-8)


def test_iterate_constant_trajectory(capsys):
    code, out, _ = run(capsys, "iterate", "--dist", "nary:3", "--p", "0,0.5,0.5")
    rows = read_trajectory_csv(io.StringIO(out))
    assert code == 0 and len(rows) == 2 and (rows[0] == rows[1]).all()


def test_iterate_geometric(capsys):
    code, out, _ = run(capsys, "iterate", "--dist", "geom:0.5", "--p", "0,0.5,0.5")
    assert code == 0
    assert read_trajectory_csv(io.StringIO(out))[-1][0] == pytest.approx(0.2807764, abs=1e-7)


def test_iterate_non_convergence_exit_2(capsys):
    code, _, err = run(capsys, "iterate", "--dist", "nary:3", "--p", "0,0.45,0.45,0.10", "--max-steps", "2")
    assert code == 2 and "no convergence" in err


def test_iterate_invalid_vector_exit_65(capsys):
    code, _, err = run(capsys, "iterate", "--dist", "nary:3", "--p", "0.5,0.6")
    assert code == 65 and "sum" in err


def test_iterate_rational_input_and_digits(capsys, tmp_path):
    path = tmp_path / "traj.csv"
    code, _, _ = run(capsys, "iterate", "--dist", "nary:2", "--p", "0,1/2,1/2", "--digits", "5", "-o", str(path))
    assert code == 0
    lines = path.read_text().splitlines()
    assert lines[0] == "m,p_0,p_1,p_2" and lines[2] == "1,0.5,0.25,0.25"


def test_table(capsys):
    code, out, _ = run(capsys, "table", "--even", "2,4,28..30")
    assert code == 0
    rows = read_table_csv(io.StringIO(out))
    assert [r.n for r in rows] == [2, 4, 28, 30]
    assert rows[0].alpha == pytest.approx(1 / 3, abs=1e-12)
    assert rows[2].a is None and rows[3].b is None


def test_table_rejects_odd_only(capsys):
    code, _, _ = run(capsys, "table", "--even", "3")
    assert code == 64


def test_table_4_to_26(capsys):
    _, out, _ = run(capsys, "table", "--even", "4..26")
    rows = read_table_csv(io.StringIO(out))
    assert len(rows) == 12
    assert all(max(abs(r.d_a), abs(r.d_b)) < 1 for r in rows)


def test_simulate_round_trip_and_compare(capsys):
    code, out, _ = run(
        capsys, "simulate", "--dist", "nary:3", "--height", "3", "--p", "0.2,0.4,0.4",
        "--samples", "20000", "--seed", "5", "--batches", "4", "--workers", "2", "--compare",
    )
    assert code == 0
    data = json.loads(out)
    assert all(row["within"] for row in data["comparison"])
    res = SimResult.from_json(json.dumps({k: v for k, v in data.items() if k != "comparison"}))
    assert sum(res.counts) == 20000 and res.seed == 5


def test_simulate_seed_from_environment(capsys, monkeypatch):
    args = ["simulate", "--dist", "nary:2", "--height", "2", "--p", "0,0.5,0.5", "--samples", "500"]
    monkeypatch.setenv("GWMAJORITY_SEED", "1234")
    _, a, _ = run(capsys, *args)
    _, b, _ = run(capsys, *args, "--seed", "1234")
    assert json.loads(a)["seed"] == 1234 and a == b
    monkeypatch.setenv("GWMAJORITY_SEED", "nope")
    code, _, _ = run(capsys, *args)
    assert code == 64


def test_certify(capsys):
    code, out, _ = run(capsys, "certify", "--n", "2..12", "--dist", "geom:0.25")
    assert code == 0
    reports = json.loads(out)
    assert all(r["verdict"] for r in reports)
    geom = reports[0]
    assert geom["fixed_point"]["derivative_at_alpha"] >= 0
    n2 = next(r for r in reports if r["source"] == "n=2")
    assert n2["fixed_point"]["degenerate"] and n2["budan"]["bound"] == 0


def test_certify_needs_input(capsys):
    assert run(capsys, "certify")[0] == 64


def test_bounds(capsys):
    code, out, _ = run(capsys, "bounds", "--n", "1..50", "--estim", "3..5", "--dpa", "350")
    assert code == 0
    results = json.loads(out)
    assert {"name", "n", "lhs", "rhs", "margin", "verdict"} <= set(results[0])
    assert any(r["verdict"] == "warn" for r in results)
    assert not any(r["verdict"] == "fail" for r in results)


def test_bounds_failed_check_exit_65(capsys):
    # the threshold sequence is not yet below 1/4 at n = 26
    code, out, _ = run(capsys, "bounds", "--dpa", "26")
    assert code == 65
    assert json.loads(out)[0]["verdict"] == "fail"


def test_identities(capsys):
    code, out, _ = run(capsys, "identities", "--n-max", "20", "--ell-max", "3", "--recurrence-max", "10")
    assert code == 0
    assert all(r["verdict"] == "pass" for r in json.loads(out))


def test_plotdata(capsys):
    code, out, _ = run(capsys, "plotdata", "--fn", "3,4", "--geom", "0.5,0.25", "--f3", "7", "--grid", "11")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["t", "f_3", "f_4", "geom_0.5", "geom_0.25", "f3_7"]
    assert len(rows) == 12
    assert float(rows[-1][1]) == 1.0


def test_config_file(capsys, tmp_path):
    cfg = tmp_path / "run.args"
    cfg.write_text("# ternary tree run\niterate\n--dist nary:3   # law\n--p 0,0.45,0.45,0.10\n--tol 1e-10\n")
    code, out, _ = run(capsys, f"@{cfg}")
    assert code == 0
    assert read_trajectory_csv(io.StringIO(out))[-1][0] == pytest.approx(0.2, abs=1e-8)


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "gwmajority", "table", "--even", "bad"], capture_output=True, text=True
    )
    assert proc.returncode == 64
    proc = subprocess.run([sys.executable, "-m", "gwmajority", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("gwmajority")
