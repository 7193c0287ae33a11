import csv
import json
import subprocess
import sys

import pytest

import steincert.cli as cli
from steincert.cli import UsageError, parse_grid, run
from steincert.triangular_array import DEFAULT_N_GRID


def run_json(tmp_path, *argv):
    out = tmp_path / "report.json"
    code = run([*argv, "--output", str(out)])
    return code, json.loads(out.read_text())


def test_geometric_grid_syntax():
    assert parse_grid("1e2:1e5", integer=True) == list(DEFAULT_N_GRID)
    assert parse_grid("1:10") == pytest.approx([1, 10**0.25, 10**0.5, 10**0.75, 10])
    assert parse_grid("2:3") == [2.0, 3.0]
    assert parse_grid("0.25,0.5") == [0.25, 0.5]
    assert parse_grid("1e3") == [1000.0]


@pytest.mark.parametrize("text", ["a,b", "1:2:3", "0:10", "5:1", ",", "inf"])
def test_bad_grids(text):
    with pytest.raises(UsageError):
        parse_grid(text)


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["indices", "--bogus"],
    ["indices", "--alpha", "0.7"],
    ["indices", "--alpha", "0"],
    ["certify", "--plot"],
    ["distance", "--samples", "1.5"],
    ["distance", "--n-grid", "10,5"],
    ["optimality", "--alpha-grid", "0.01,0.1"],
    ["constants", "--sigma", "-1"],
    ["stein-check", "--delta", "0"],
    ["--replay", "missing.json"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert run(argv) == 2
    assert "usage" in capsys.readouterr().err


def test_help_exits_cleanly(capsys):
    assert run(["--help"]) == 0
    assert "indices" in capsys.readouterr().out


def test_indices_report(tmp_path):
    code, rep = run_json(tmp_path, "indices", "--alpha", "0.5", "--gamma", "0.5", "--n-grid", "1e2:1e5",
                         "--format", "json")
    assert code == 0
    closed = {r["index"]: r["closed_form"] for r in rep["results"]}
    assert closed["lindeberg"] == 0.5
    assert closed["relaxed"] == pytest.approx(0.0576015, abs=1e-7)
    assert rep["config"]["n_grid"] == list(DEFAULT_N_GRID)


def test_constants_report(tmp_path):
    code, rep = run_json(tmp_path, "constants", "--sigma", "1.7")
    assert code == 0
    assert rep["results"]["constants"]["c_psi"] == pytest.approx(20.19, abs=0.02)


def test_failure_exit_1(tmp_path, capsys):
    code = run(["distance", "--alpha", "0.5", "--n-grid", "100", "--method", "exact",
                "--output", str(tmp_path / "x.json")])
    assert code == 1
    assert "AtomCapExceeded" in capsys.readouterr().err


def test_unwritable_output_is_a_failure(tmp_path):
    assert run(["optimality", "--output", str(tmp_path / "no" / "x.json")]) == 1


def test_json_and_csv_carry_identical_values(tmp_path):
    args = ["distance", "--alpha", "0.5", "--n-grid", "6,300", "--samples", "2e4", "--seed", "5"]
    assert run([*args, "--output", str(tmp_path / "r.json")]) == 0
    assert run([*args, "--format", "csv", "--output", str(tmp_path / "r.csv")]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0].startswith("# report ")
    rows = list(csv.DictReader(lines[1:]))
    curve = rep["results"][0]["curve"]
    for row, point in zip(rows, curve, strict=True):
        assert row["value"] == repr(point["value"])
        assert float(row["location"]) == point["location"]
        if point["confidence"]:
            assert row["half_width"] == repr(point["confidence"]["half_width"])


@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_replay_is_byte_identical(tmp_path, fmt):
    first = tmp_path / f"a.{fmt}"
    again = tmp_path / f"b.{fmt}"
    assert run(["certify", "--alpha", "0.5", "--n-grid", "8,300", "--samples", "3e4", "--format", fmt,
                "--output", str(first)]) == 0
    assert run(["--replay", str(first), "--replay-output", str(again)]) == 0
    assert first.read_bytes() == again.read_bytes()


def test_report_provenance(tmp_path):
    _, rep = run_json(tmp_path, "distance", "--alpha", "0.5", "--n-grid", "8", "--seed", "9")
    assert rep["seed"] == 9 and rep["generator"].startswith("numpy.random.PCG64")
    assert rep["config"]["samples"] == 10**6 and rep["config"]["level"] == 0.99
    assert "timestamp" not in json.dumps(rep)


def test_plot_written(tmp_path):
    out = tmp_path / "opt.json"
    assert run(["optimality", "--p", "0,1", "--output", str(out), "--plot"]) == 0
    assert (tmp_path / "opt.svg").read_text().lstrip().startswith("<?xml")


def test_plot_failure_does_not_fail_run(tmp_path, monkeypatch, capsys):
    def broken(path, plot):
        raise RuntimeError("no backend")

    monkeypatch.setattr(cli, "write_plot", broken)
    assert run(["optimality", "--output", str(tmp_path / "o.json"), "--plot"]) == 0
    assert "plot skipped" in capsys.readouterr().err


def test_stein_check_and_identities(tmp_path):
    code, rep = run_json(tmp_path, "stein-check", "--kind", "indicator", "--z=-1,0,1", "--x-step", "0.05")
    assert code == 0 and all(r["pass"] for r in rep["results"])
    code, rep = run_json(tmp_path, "constants", "--sigma-range", "1.6:1.8", "--sigma-step", "0.1", "--identities")
    assert code == 0
    assert rep["results"]["scan"]["best_sigma"] == 1.7
    assert rep["results"]["identities"]["pass"]


def test_summary_line_on_stderr(tmp_path, capsys):
    run(["optimality", "--output", str(tmp_path / "o.json")])
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("optimality:")


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "steincert", "optimality", "--p", "1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["command"] == "optimality"
