import json

import pandas as pd
import pytest

from analogical_inference import cli
from analogical_inference.bounds import BoundReport
from analogical_inference.cli import RunConfig, main, run_command
from analogical_inference.errors import UsageError


def test_solve(capsys):
    assert main(["solve", "--a", "1", "--b", "2", "--c", "3", "--q", "1"]) == 0
    assert capsys.readouterr().out == "4\n"
    assert main(["solve", "--a", "5", "--b", "1", "--c", "2"]) == 0
    assert capsys.readouterr().out == "none\n"
    assert main(["solve", "--a", "1e100", "--b", "2e100", "--c", "3e100", "--q", "4"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(96 ** 0.25 * 1e100, rel=1e-12)


def test_power_and_check(capsys):
    assert main(["power", "--a", "3", "--b", "4", "--c", "6", "--d", "7"]) == 0
    assert float(capsys.readouterr().out) == pytest.approx(1.0, abs=1e-9)
    assert main(["check", "--a", "2,1", "--b", "4,2", "--c", "6,3", "--d", "8,6", "--p", "1,0"]) == 0
    assert capsys.readouterr().out == "true\n"
    assert main(["check", "--a", "3", "--b", "4", "--c", "6", "--d", "7", "--p", "2"]) == 0
    assert capsys.readouterr().out == "false\n"


def test_usage_and_domain_errors_exit_2(capsys):
    assert main(["solve", "--a", "1", "--b", "2", "--c", "3", "--q", "0"]) == 2
    assert "ERROR" in capsys.readouterr().err
    assert main(["power", "--a", "4", "--b", "3", "--c", "2", "--d", "1"]) == 2
    assert main(["check", "--a", "1,1", "--b", "1,1", "--c", "1,1", "--d", "1,1", "--p", "1,1,1"]) == 2
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == 2


def test_run_config_validation():
    with pytest.raises(UsageError):
        RunConfig(command="frobnicate")
    with pytest.raises(UsageError):
        RunConfig(command="solve", a=(1.0,), b=(2.0,))
    with pytest.raises(UsageError):
        RunConfig(command="predict", train="t.csv", query="q.csv", cap=0)


def test_counterexample_report(tmp_path):
    out = tmp_path / "ce.json"
    assert main(["counterexample", "--n", "2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["command"] == "counterexample"
    report = doc["report"]
    assert report["subset_count"] == 1
    assert report["denominator"] == 16
    assert report["lower_bound"] == {"num": 1, "den": 16, "decimal": 0.0625}
    assert report["violated"] is False
    assert "wall_time" in doc["timing"]


@pytest.mark.slow
def test_counterexample_falsifies_the_claimed_bound(tmp_path):
    out = tmp_path / "ce.json"
    assert main(["counterexample", "--n", "4", "--model", "minimal", "--audit", "--out", str(out)]) == 0
    report = json.loads(out.read_text())["report"]
    assert report["denominator"] == 65536
    assert report["lower_bound"]["decimal"] >= 0.42
    assert report["theorem3_rhs"] == {"num": 1, "den": 4, "decimal": 0.25}
    assert report["violated"] is True
    assert report["small_subset_roots"] == 0


def test_verify_worst_case(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "worst", "--q", "2", "--delta", "0.1", "--seed", "7",
                 "--trials", "50", "--out", str(out)]) == 0
    reports = json.loads(out.read_text())["report"]
    assert len(reports) == 1
    assert reports[0]["holds"] is True
    assert reports[0]["constant"] == 2.0


def reject_constant(name):
    raise ValueError(f"non-standard json constant {name}")


@pytest.mark.parametrize("suite", ["worst", "average"])
def test_zero_delta_report_is_strict_json(tmp_path, suite):
    out = tmp_path / "zero.json"
    assert main(["verify", "--suite", suite, "--delta", "0", "--q", "2", "--p", "0.7,1.3",
                 "--trials", "30", "--out", str(out)]) == 0
    report = json.loads(out.read_text(), parse_constant=reject_constant)["report"][0]
    assert report["observed"] == 0.0
    assert report["ratio"] == 0.0


def test_verify_sweep_writes_one_row_per_delta(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["verify", "--suite", "average", "--deltas", "0,0.05,0.1", "--format", "csv",
                 "--out", str(out)]) == 0
    table = pd.read_csv(out)
    assert table["delta"].tolist() == [0.0, 0.05, 0.1]
    assert table["verified"].all()


def test_verify_boolean_suite(tmp_path):
    out = tmp_path / "b.json"
    assert main(["verify", "--suite", "boolean", "--n", "3", "--deltas", "0,0.125", "--out", str(out)]) == 0
    reports = json.loads(out.read_text())["report"]
    assert [r["delta"]["num"] for r in reports] == [0, 1]


def test_identical_runs_give_identical_reports(tmp_path):
    bodies = []
    for name in ("one.json", "two.json"):
        out = tmp_path / name
        assert main(["verify", "--suite", "worst", "--seed", "3", "--trials", "20", "--out", str(out)]) == 0
        doc = json.loads(out.read_text())
        bodies.append((doc["command"], doc["report"]))
    assert bodies[0] == bodies[1]


def test_failed_verification_exits_1(monkeypatch, tmp_path):
    failing = BoundReport(
        bound_kind="worst", q=1.0, delta=0.1, achieved_delta=0.1, constant=4.0, bound_value=0.4,
        observed=0.5, holds=False, adjusted_bound=0.4, adjusted_holds=False, hypothesis_holds=True,
        trials=1, checked=1,
    )
    monkeypatch.setattr(cli, "run_suite", lambda *args, **kwargs: [failing])
    assert main(["verify", "--out", str(tmp_path / "v.json")]) == 1


def test_boolean_ap(tmp_path):
    out = tmp_path / "ap.json"
    assert main(["boolean-ap", "--n", "2", "--out", str(out)]) == 0
    report = json.loads(out.read_text())["report"]
    assert report["passed"] is True
    assert report["affine_count"] == 8


def test_predict_and_fit(tmp_path):
    train = tmp_path / "train.csv"
    train.write_text("x1,x2,y\n1,1,2.449489742783178\n2,1,3.4641016151377544\n1,2,3.872983346207417\n")
    query = tmp_path / "query.csv"
    query.write_text("x1,x2\n2,2\n10,10\n")
    out = tmp_path / "pred.csv"
    assert main(["predict", "--train", str(train), "--query", str(query), "--p", "2", "--q", "2",
                 "--format", "csv", "--out", str(out)]) == 0
    table = pd.read_csv(out)
    assert table["value"].tolist()[0] == pytest.approx(21 ** 0.5, rel=1e-9)
    assert pd.isna(table["value"].tolist()[1])
    assert table["root_size"].tolist() == [2, 0]

    fit_out = tmp_path / "fit.json"
    assert main(["fit", "--train", str(train), "--p", "2", "--q", "2", "--out", str(fit_out)]) == 0
    model = json.loads(fit_out.read_text())["report"]["model"]
    assert model["a"] == pytest.approx([2.0, 3.0], rel=1e-6)
    assert model["b"] == pytest.approx(1.0, rel=1e-6)


def test_predict_rejects_bad_files(tmp_path, capsys):
    train = tmp_path / "train.csv"
    train.write_text("x1,y\n1,-1\n")
    query = tmp_path / "query.csv"
    query.write_text("x1\n2\n")
    assert main(["predict", "--train", str(train), "--query", str(query)]) == 2
    assert "row 1" in capsys.readouterr().err


def test_run_command_returns_the_report():
    status, report = run_command(RunConfig(command="solve", a=(0.0,), b=(3.0,), c=(4.0,),
                                           profile=cli.PowerProfile((1.0,), 2.0)))
    assert status == 0
    assert report["solution"] == 5.0
