"""End-to-end test: every bundled problem through the CLI, then the full selftest."""

import pytest
import yaml
from typer.testing import CliRunner

from vicar.cli import app
from vicar.report import Report
from vicar.selftest import GOLDEN_DIR, discover

runner = CliRunner()

CASES = [case.name for case in discover()]


@pytest.mark.parametrize("name", CASES)
def test_analyze_golden_problem(name, tmp_path, monkeypatch):
    """analyze exits as the fixture expects and writes a valid report."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("VICAR_SEED", raising=False)
    expected = yaml.safe_load((GOLDEN_DIR / "expected" / f"{name}.yml").read_text())

    result = runner.invoke(app, ["analyze", str(GOLDEN_DIR / f"{name}.vicar"), "--out", "r.json"])
    assert result.exit_code == expected.get("exit_code", 0), result.output

    report = Report.model_validate_json((tmp_path / "r.json").read_text())
    assert report.problem == name
    if "case" in expected:
        assert report.classification.case == expected["case"]
    if "verdict" in expected:
        assert report.classification.verdict == expected["verdict"]


def test_full_selftest():
    result = runner.invoke(app, ["selftest"])
    assert result.exit_code == 0, result.output
    assert "passed." in result.output
