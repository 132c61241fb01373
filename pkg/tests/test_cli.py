import csv
import io
import json

import pytest
from click.testing import CliRunner

from oblique.main import cli


@pytest.fixture
def runner():
    return CliRunner(mix_stderr=False)


def test_check_writes_verdicts(runner, scenario_dir):
    result = runner.invoke(cli, ["check", "--config", str(scenario_dir / "caligo.yaml")])
    assert result.exit_code == 0, result.stderr
    report = json.loads(result.stdout)
    assert report["trajectory"] is None
    assert {v["status"] for v in report["verdicts"]["caligo"]} == {"holds"}


def test_reports_keep_timings_in_their_own_section(runner, scenario_dir):
    args = ["check", "--config", str(scenario_dir / "caligo.yaml")]
    first, second = runner.invoke(cli, args), runner.invoke(cli, args)
    assert first.exit_code == 0, first.stderr
    reports = [json.loads(r.stdout) for r in (first, second)]
    assert list(reports[0])[-1] == "timings"
    assert "checks" in reports[0]["timings"]
    for report in reports:
        report.pop("timings")
    assert reports[0] == reports[1]


def test_integrate_csv_columns(runner, scenario_dir):
    result = runner.invoke(cli, ["integrate", "--config", str(scenario_dir / "free-motion.yaml"), "--format", "csv"])
    assert result.exit_code == 0, result.stderr
    lines = result.stdout.split("\n")
    assert lines[0] == "t,x,xp,u,v,V1,V2"
    assert lines[1] == "1.0,1.0,2.0,1.0,1.0,0.5,0.5"
    assert lines[-1] == ""
    rows = list(csv.DictReader(io.StringIO(result.stdout)))
    assert float(rows[-1]["t"]) == 100.0
    assert all(row["V1"] == "0.5" for row in rows)


def test_integrate_csv_leaves_unrequested_monitors_empty(runner, scenario_dir):
    result = runner.invoke(cli, ["integrate", "--config", str(scenario_dir / "growth.yaml"), "--format", "csv"])
    assert result.exit_code == 0, result.stderr
    rows = list(csv.reader(io.StringIO(result.stdout)))
    assert rows[1][5:] == ["", ""]


def test_integrate_json_and_plot_data(runner, scenario_dir, tmp_path):
    out, plot = tmp_path / "report.json", tmp_path / "residual.csv"
    result = runner.invoke(
        cli,
        [
            "integrate",
            "--config",
            str(scenario_dir / "free-motion.yaml"),
            "--horizon",
            "1000",
            "--out",
            str(out),
            "--emit-plot-data",
            str(plot),
        ],
    )
    assert result.exit_code == 0, result.stderr
    report = json.loads(out.read_text())
    assert report["classification"]["kind"] == "AsymptoticallyLinear"
    assert report["scenario"]["integration"]["horizon"] == 1000.0
    rows = list(csv.DictReader(io.StringIO(plot.read_text())))
    assert list(rows[0]) == ["t", "residual"]
    assert max(abs(float(r["residual"])) for r in rows) < 1e-6


def test_plot_data_needs_a_linear_run(runner, scenario_dir, tmp_path):
    result = runner.invoke(
        cli,
        ["integrate", "--config", str(scenario_dir / "blowup.yaml"), "--emit-plot-data", str(tmp_path / "r.csv")],
    )
    assert result.exit_code == 2
    assert "asymptotically linear" in result.stderr


def test_classify(runner, scenario_dir):
    result = runner.invoke(cli, ["classify", "--config", str(scenario_dir / "growth.yaml")])
    assert result.exit_code == 0, result.stderr
    assert json.loads(result.stdout)["classification"]["kind"] == "Unbounded"


def test_sweep_csv(runner, scenario_dir):
    result = runner.invoke(
        cli,
        [
            "sweep",
            "--config",
            str(scenario_dir / "free-motion.yaml"),
            "--x0",
            "0",
            "2",
            "2",
            "--xp0",
            "1",
            "3",
            "2",
            "--format",
            "csv",
        ],
    )
    assert result.exit_code == 0, result.stderr
    rows = list(csv.DictReader(io.StringIO(result.stdout)))
    assert [(r["x0"], r["xp0"]) for r in rows] == [("0.0", "1.0"), ("0.0", "3.0"), ("2.0", "1.0"), ("2.0", "3.0")]
    assert {r["kind"] for r in rows} == {"AsymptoticallyLinear"}


def test_sweep_needs_a_grid(runner, scenario_dir):
    result = runner.invoke(cli, ["sweep", "--config", str(scenario_dir / "free-motion.yaml")])
    assert result.exit_code == 2
    assert "--x0 is required" in result.stderr


@pytest.mark.parametrize(
    "args",
    [
        ["integrate", "--config", "does-not-exist.yaml"],
        ["integrate", "--horizon", "-1", "--config", "x.yaml"],
        ["integrate", "--rel-tol", "2", "--config", "x.yaml"],
        ["sweep", "--x0", "1", "0", "3", "--config", "x.yaml"],
        ["integrate", "--format", "xml", "--config", "x.yaml"],
    ],
)
def test_usage_errors_exit_2(runner, args):
    assert runner.invoke(cli, args).exit_code == 2


def test_bad_yaml_exits_2(runner, tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("name: [", encoding="utf-8")
    result = runner.invoke(cli, ["check", "--config", str(path)])
    assert result.exit_code == 2
    assert "YAML parse error" in result.stderr


def test_horizon_before_t0_is_rejected(runner, scenario_dir):
    result = runner.invoke(cli, ["integrate", "--config", str(scenario_dir / "theorem1-demo.yaml"), "--horizon", "50"])
    assert result.exit_code == 2
    assert "must exceed t0" in result.stderr
