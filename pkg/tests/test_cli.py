import json
import subprocess
import sys

import pytest

from unramified.cli import EXIT_OK, EXIT_STATS, EXIT_VALIDATION, EXIT_VERIFY, main, parse_range
from unramified.experiments import read_csv, read_jsonl


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_range():
    assert parse_range("1..4") == (1, 2, 3, 4)
    assert parse_range("2,5,7..8") == (2, 5, 7, 8)
    assert parse_range("5..3") == ()


def test_dfunc_text(capsys):
    code, out, _ = run(capsys, "dfunc", "--n", "1..2")
    assert code == EXIT_OK
    assert out.splitlines() == ["D_1 = 1", "D*_1 = 1", "D_2 = (u - 1)/(u - v)", "D*_2 = t/(2*t + 2)"]


def test_dfunc_json(capsys):
    code, out, _ = run(capsys, "dfunc", "--n", "2", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out) == {"n": 2, "D": "(u - 1)/(u - v)", "D*": "t/(2*t + 2)"}


@pytest.mark.parametrize("n", ["0", "61"])
def test_dfunc_out_of_range(capsys, n):
    code, _, err = run(capsys, "dfunc", "--n", n)
    assert code == EXIT_VALIDATION and "error" in err


def test_probs(capsys):
    code, out, _ = run(capsys, "probs", "--n", "2", "--p", "3")
    assert code == EXIT_OK
    assert "rho   = 7/26" in out and "alpha = 3/8" in out and "beta  = 1/8" in out
    assert "0.269230769231" in out
    code, out, _ = run(capsys, "probs", "--n", "1", "--p", "5", "--format", "json")
    rows = [json.loads(line) for line in out.splitlines()]
    assert [(r["num"], r["den"]) for r in rows] == [("1", "1")] * 3


def test_probs_composite(capsys):
    code, _, err = run(capsys, "probs", "--n", "2", "--p", "4")
    assert code == EXIT_VALIDATION and "p must be prime" in err


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "dseries", "1..12", "--format", "json")
    assert code == EXIT_OK
    rows = [json.loads(line) for line in out.splitlines()]
    assert all(r["ok"] for r in rows)
    inversion = next(r for r in rows if r["check"] == "inversion")
    assert inversion["checked"] == 12
    code, out, _ = run(capsys, "verify", "incidence", "--n", "12")
    assert code == EXIT_OK and "FAIL" not in out


def test_verify_empty_range(capsys):
    code, _, err = run(capsys, "verify", "dseries", "5..3")
    assert code == EXIT_VALIDATION and "empty range" in err


def test_verify_failure_exit_code(capsys, monkeypatch):
    import unramified.cli as cli

    monkeypatch.setattr(cli, "inversion_check", lambda n: n != 3)
    code, out, _ = run(capsys, "verify", "dseries", "1..4")
    assert code == EXIT_VERIFY and "FAIL inversion" in out


def test_missing_p_is_usage_error(capsys):
    code, _, err = run(capsys, "simulate", "--n", "2")
    assert code == EXIT_VALIDATION and "--p" in err


def test_simulate_writes_reports(capsys, tmp_path):
    out_file = tmp_path / "sim.jsonl"
    code, out, _ = run(capsys, "simulate", "--n", "2", "--p", "3", "--samples", "4000", "--seed", "1",
                       "--out", str(out_file))
    assert code == EXIT_OK
    reports = read_jsonl(out_file.read_text())
    assert [r.region for r in reports] == ["OK", "MK", "ALL"]
    assert all(abs(r.estimate.z_score) <= 4 for r in reports)
    assert "root_expectation" in out


def test_simulate_is_reproducible(capsys, tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        run(capsys, "simulate", "--n", "2", "--p", "2", "--samples", "1500", "--seed", "7",
            "--probabilities", "--out", str(path))
    ra, rb = read_jsonl(a.read_text()), read_jsonl(b.read_text())
    assert len(ra) == 6
    assert [r.payload() for r in ra] == [r.payload() for r in rb]


def test_integrate_json_round_trip(capsys):
    code, out, _ = run(capsys, "integrate", "--n", "2", "--p", "3", "--region", "OK", "--samples", "5000",
                       "--format", "json")
    assert code == EXIT_OK
    (rep,) = read_jsonl(out)
    assert rep.quantity == "phi_integral" and abs(rep.estimate.mean - 0.75) < 0.02


def test_integrate_csv_and_report_dir(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("UNRAMIFIED_REPORT_DIR", str(tmp_path))
    code, out, _ = run(capsys, "integrate", "--n", "2", "--p", "3", "--samples", "2000", "--format", "csv",
                       "--seed", "3")
    assert code == EXIT_OK
    assert len(read_csv(out)) == 2
    files = list(tmp_path.glob("*.csv"))
    assert len(files) == 1 and read_csv(files[0].read_text())


def test_statistical_gate_exit_code(capsys, monkeypatch):
    import unramified.cli as cli

    monkeypatch.setattr(cli, "Z_THRESHOLD", -1.0)
    code, _, _ = run(capsys, "integrate", "--n", "2", "--p", "3", "--samples", "200")
    assert code == EXIT_STATS


def test_console_script_entry_point():
    proc = subprocess.run([sys.executable, "-m", "unramified.cli", "probs", "--n", "2", "--p", "2"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and "3/14" in proc.stdout
