import json

import pytest
from click.testing import CliRunner

from oblique.main import cli
from oblique.schemas.run import SuiteReport
from oblique.services.paper_service import ORDER_LADDERS, PaperService


pytestmark = pytest.mark.slow

GROUPS = {
    "free_motion",
    "blowup",
    "growth",
    "theorem1_demo",
    "caligo",
    "negative_controls",
    "quadrature",
    "transform",
    "order",
    "sweep",
}


def test_acceptance_suite_passes_and_is_reproducible(scenario_dir, tmp_path):
    runner = CliRunner(mix_stderr=False)
    texts = []
    for name in ("first.json", "second.json"):
        out = tmp_path / name
        result = runner.invoke(cli, ["verify-paper", "--scenario-dir", str(scenario_dir), "--out", str(out)])
        assert result.exit_code == 0, result.stderr
        texts.append(out.read_text(encoding="utf-8"))

    reports = [SuiteReport.model_validate_json(text) for text in texts]
    assert reports[0].passed, reports[0].failures
    assert reports[0].reproducible_json() == reports[1].reproducible_json()
    assert set(reports[0].timings) == GROUPS

    names = {c.name.split(".")[0] for c in reports[0].checks}
    assert names >= GROUPS - {"negative_controls"} | {"controls"}
    assert list(json.loads(texts[0]))[-1] == "timings"


def test_negative_controls_are_reproducible(scenario_dir):
    first = PaperService.negative_controls(scenario_dir)
    second = PaperService.negative_controls(scenario_dir)
    assert all(c.passed for c in first)
    assert [c.model_dump() for c in first] == [c.model_dump() for c in second]


def test_order_of_the_stepper(scenario_dir):
    checks = {c.name: c for c in PaperService.order_check(scenario_dir)}
    assert set(checks) == {"order.free-motion", "order.blowup", "order.growth"}
    for check in checks.values():
        assert check.passed, check.detail
        assert check.values["observed_order"] >= 4.0


def test_order_ladders_halve_the_tolerance():
    for ladder in ORDER_LADDERS.values():
        assert len(ladder) == 4
        assert all(b == a / 2 for a, b in zip(ladder, ladder[1:]))
