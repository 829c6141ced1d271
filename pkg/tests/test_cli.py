import csv
import json
import math
import os

import pytest

from ivfunctional import cli, harness, scenario

FAST = ["--set", "reps=4", "--set", "n_grid=100,200,400"]


def run(argv, capsys=None):
    code = cli.main(argv)
    out = capsys.readouterr() if capsys else None
    return code, out


def test_simulate_outputs(tmp_path):
    out = tmp_path / "o"
    code, _ = run(["simulate", *FAST, "--out", str(out), "--threads", "1"])
    assert code == 0
    with open(out / "records.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == cli.CSV_HEADER
    assert len(rows) == 1 + 12
    assert all(len(r) == 10 for r in rows)
    summary = json.loads((out / "summary.json").read_text())
    assert summary["schema"] == cli.SCHEMA
    assert summary["theoretical_exponent"] == pytest.approx(-0.6)
    assert [r["n"] for r in summary["per_n"]] == [100, 200, 400]
    assert summary["scenario"]["reps"] == 4
    assert "slope_within_tolerance" in summary["verdicts"]


def test_simulate_byte_identical_and_rerunnable(tmp_path):
    a, b, c = (tmp_path / x for x in "abc")
    assert run(["simulate", *FAST, "--out", str(a), "--threads", "1"])[0] == 0
    assert run(["simulate", *FAST, "--out", str(b), "--threads", "4"])[0] == 0
    assert (a / "records.csv").read_bytes() == (b / "records.csv").read_bytes()
    # closure: the echoed config reproduces the run
    assert run(["simulate", "--config", str(a / "scenario.cfg"), "--out", str(c)])[0] == 0
    assert (a / "records.csv").read_bytes() == (c / "records.csv").read_bytes()
    echoed = json.loads((a / "summary.json").read_text())["config_text"]
    assert echoed == (a / "scenario.cfg").read_text()


def test_summary_round_trip_and_slope(tmp_path):
    out = tmp_path / "o"
    run(["simulate", *FAST, "--out", str(out)])
    text = (out / "summary.json").read_text()
    data = json.loads(text)
    assert json.loads(cli.dumps(data)) == data
    sc = scenario.load(str(out / "scenario.cfg"))
    fit = harness.fit_rate(harness.summarize_mse(harness.run_experiment(sc)))
    assert data["fit"]["slope"] == fit.slope


def test_csv_floats_round_trip(tmp_path):
    out = tmp_path / "o"
    run(["simulate", *FAST, "--out", str(out)])
    sc = scenario.load(str(out / "scenario.cfg"))
    recs = harness.run_experiment(sc)
    with open(out / "records.csv") as fh:
        rows = list(csv.DictReader(fh))
    for r, row in zip(recs, rows):
        assert float(row["estimate"]) == r.estimate
        assert float(row["sq_error"]) == r.sq_error
        assert int(row["seed"]) == r.seed


def test_empty_records_header_only():
    assert cli.records_csv([]) == ",".join(cli.CSV_HEADER) + "\n"


def test_rates_row(capsys):
    code, out = run(["rates", "--set", "p=1", "--set", "a=1", "--set", "s=1",
                     "--set", "n_grid=10000"], capsys)
    assert code == 0
    rows = list(csv.DictReader(out.out.splitlines()))
    assert int(rows[0]["k_star"]) == 10
    assert float(rows[0]["delta_star"]) == pytest.approx(1e-4, rel=1e-14)


def test_hard_instance(capsys):
    code, out = run(["hard-instance", "--set", "a=1", "--n", "100", "--k-star", "2"], capsys)
    assert code == 0
    data = json.loads(out.out)
    assert data["phi_coef"] == pytest.approx(0.141421, abs=1e-6)
    assert data["checks"]["variance"] and data["checks"]["membership"]


def test_bounds_exit_codes(tmp_path, monkeypatch):
    argv = ["bounds", "--set", "reps=20", "--set", "n_grid=500,1000", "--out", str(tmp_path)]
    assert run(argv)[0] == 0
    report = json.loads((tmp_path / "bounds.json").read_text())
    assert report["pass"] is True
    real = harness.check_bias

    def failing(*a, **k):
        out = real(*a, **k)
        out["pass"] = False
        return out

    monkeypatch.setattr(harness, "check_bias", failing)
    assert run(argv)[0] == 3


@pytest.mark.parametrize("argv", [
    ["simulate", "--set", "bogus=1"],
    ["simulate", "--config", "/nonexistent.cfg"],
    ["simulate", "--set", "J=1", "--set", "n_grid=100000"],
    ["rates", "--threads", "-2"],
])
def test_config_errors_exit_2(argv, capsys):
    code, out = run(argv, capsys)
    assert code == 2
    assert out.err.startswith("error:")


def test_line_precise_message(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("master_seed = 1\n\nreps = lots\n")
    code, out = run(["simulate", "--config", str(cfg)], capsys)
    assert code == 2
    assert f"{cfg}:3" in out.err


def test_missing_seed(tmp_path, capsys):
    cfg = tmp_path / "noseed.cfg"
    cfg.write_text("p = 2\n")
    code, out = run(["simulate", "--config", str(cfg)], capsys)
    assert code == 2 and "master_seed" in out.err


def test_unwritable_output(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    code, out = run(["rates", "--out", str(blocker / "sub")], capsys)
    assert code == 2


def test_monotone_helper():
    rows = [harness.MseRow(n=1, reps=2, mse=1.0, se=0.1, truncation_rate=0.0),
            harness.MseRow(n=2, reps=2, mse=1.2, se=0.1, truncation_rate=0.0)]
    assert cli.monotone_within(rows)
    assert not cli.monotone_within(rows, k=1.0)
    assert cli._num(math.nan) is None
