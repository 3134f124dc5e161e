import csv
import io
import json
import math
import subprocess
import sys

import pytest

from ifm_search import __version__
from ifm_search.cli import main


def run_cli(capsys, *argv):
    try:
        code = main(list(argv))
    except SystemExit as exc:
        code = exc.code
    out, err = capsys.readouterr()
    return code, out, err


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_run_json_fifteen(capsys):
    code, out, _ = run_cli(capsys, "run", "--n", "15", "--m", "3", "--k", "1",
                           "--theta-mode", "pi-over-m", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["success"] == pytest.approx(0.26, abs=1e-3)
    assert doc["closed_form_available"]
    last = doc["rows"][-1]
    assert last["cf_success"] == pytest.approx(last["success"], abs=1e-11)


def test_run_absorption_oracle_csv(capsys):
    code, out, err = run_cli(capsys, "run", "--n", "4", "--m", "1", "--theta-mode", "pi-over-2m", "--k", "1")
    assert code == 0
    rows = csv_rows(out)
    assert float(rows[-1]["success"]) == pytest.approx(0.5625, abs=1e-12)
    assert rows[-1]["cf_tau"] == ""
    assert "closed form" in err


def test_run_explicit_closed_form_unavailable(capsys):
    code, _, err = run_cli(capsys, "run", "--n", "4", "--m", "1", "--k", "1", "--closed-form")
    assert code == 1
    assert "closed form" in err


def test_run_bad_m(capsys):
    code, _, err = run_cli(capsys, "run", "--n", "4", "--m", "0", "--k", "1")
    assert code == 2
    assert "--m" in err


def test_run_theta_flags_exclusive(capsys):
    code, _, err = run_cli(capsys, "run", "--n", "4", "--m", "2", "--theta", "0.3", "--theta-mode", "pi-over-m")
    assert code == 2


def test_run_twelve_significant_digits(capsys):
    _, out, _ = run_cli(capsys, "run", "--n", "15", "--m", "3", "--k", "2")
    for row in csv_rows(out):
        for key, value in row.items():
            digits = value.lstrip("-").replace(".", "").split("e")[0].lstrip("0")
            assert len(digits) <= 12, (key, value)


def test_compare_fifteen(capsys):
    code, out, _ = run_cli(capsys, "compare", "--n", "15", "--queries", "3", "--m", "3", "--k", "1")
    assert code == 0
    (row,) = csv_rows(out)
    assert float(row["classical"]) == 0.2
    assert float(row["grover"]) == pytest.approx(0.935, abs=5e-4)
    assert float(row["ifm_grover"]) == pytest.approx(0.26, abs=1e-3)


def test_compare_four_json(capsys):
    code, out, _ = run_cli(capsys, "compare", "--n", "4", "--queries", "1", "--m", "1", "--k", "1",
                           "--theta-mode", "pi-over-2m", "--format", "json")
    assert code == 0
    (row,) = json.loads(out)["rows"]
    assert (row["classical"], row["grover"]) == (0.25, 1.0)
    assert row["ifm_grover"] == pytest.approx(0.5625, abs=1e-12)
    assert set(row) == {"n", "queries", "m", "k", "classical", "grover", "ifm_grover"}


def test_compare_usage_errors(capsys):
    assert run_cli(capsys, "compare", "--n", "4", "--queries", "5", "--m", "1", "--k", "5")[0] == 2
    assert run_cli(capsys, "compare", "--n", "15", "--queries", "4", "--m", "3", "--k", "1")[0] == 2


def test_compare_search(capsys):
    code, out, _ = run_cli(capsys, "compare", "--n", "15", "--queries", "6", "--search")
    assert code == 0
    assert [(int(r["m"]), int(r["k"])) for r in csv_rows(out)] == [(1, 6), (2, 3), (3, 2), (6, 1)]


def test_fig3_file_and_determinism(capsys, tmp_path):
    path = tmp_path / "fig3.csv"
    args = ("fig3", "--n", "64", "--m", "9,12,32", "--k-max", "20", "-o", str(path))
    assert run_cli(capsys, *args)[0] == 0
    first = path.read_bytes()
    lines = first.decode().splitlines()
    assert lines[0] == "n,m,k,tau,survival,success"
    assert len(lines) == 64
    assert run_cli(capsys, *args)[0] == 0
    assert path.read_bytes() == first


def test_fig3_k_zero(capsys):
    code, out, _ = run_cli(capsys, "fig3", "--n", "64", "--m", "32", "--k-max", "0")
    (row,) = csv_rows(out)
    assert float(row["success"]) == pytest.approx(1 / 64)


def test_fig3_unwritable(capsys, tmp_path):
    code, _, err = run_cli(capsys, "fig3", "-o", str(tmp_path / "missing" / "x.csv"))
    assert code == 1


def test_validate_default(capsys):
    code, out, err = run_cli(capsys, "validate")
    assert code == 0
    assert out.splitlines()[0] == "n,m,k,diff_tau,diff_survival"
    assert max(float(r["diff_tau"]) for r in csv_rows(out)) <= 1e-10
    assert "passed=True" in err


def test_validate_single_point_json(capsys):
    code, out, _ = run_cli(capsys, "validate", "--n", "15", "--m", "3", "--k-max", "1", "--format", "json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] and len(doc["rows"]) == 2


def test_validate_degenerate_points_skipped(capsys):
    code, _, err = run_cli(capsys, "validate", "--m", "1", "--theta-mode", "pi-over-m")
    assert code == 0
    assert "skipped N=64 M=1" in err


def test_validate_failure_exit_code(capsys, monkeypatch):
    import ifm_search.analysis as analysis

    monkeypatch.setattr(analysis, "VALIDATION_THRESHOLD", -1.0)
    code, _, _ = run_cli(capsys, "validate", "--n", "15", "--m", "3", "--k-max", "1")
    assert code == 3


def test_mc_within_four_sigma_and_repeatable(capsys):
    args = ("mc", "--n", "4", "--m", "1", "--k", "1", "--theta-mode", "pi-over-2m",
            "--trials", "100000", "--seed", "7", "--format", "json")
    code, out, _ = run_cli(capsys, *args)
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["target_fraction"] - 0.5625) < 4 * math.sqrt(0.5625 * 0.4375 / 1e5)
    assert abs(doc["target_z"]) < 4
    assert run_cli(capsys, *args)[1] == out


def test_mc_zero_trials(capsys):
    assert run_cli(capsys, "mc", "--n", "4", "--m", "1", "--k", "1", "--trials", "0")[0] == 2


def test_sweep_threads_env(capsys, monkeypatch):
    args = ("sweep", "--n", "4,15", "--m", "2,3", "--k-max", "2", "--format", "json")
    _, single, _ = run_cli(capsys, *args)
    monkeypatch.setenv("QSEARCH_THREADS", "3")
    _, multi, _ = run_cli(capsys, *args)
    assert single == multi
    assert len(json.loads(single)["rows"]) == 12


def test_version_module_entry():
    result = subprocess.run([sys.executable, "-m", "ifm_search", "--version"],
                            capture_output=True, text=True, check=True)
    assert result.stdout.strip().endswith(__version__)
