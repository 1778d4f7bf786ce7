"""Integration tests for `vicar analyze`."""

from __future__ import annotations

import shutil
from pathlib import Path

import pytest
from typer.testing import CliRunner

from vicar import pipeline
from vicar.analysis.classify import ClassificationReport, ClassificationVerdict
from vicar.cli import app
from vicar.report import Report
from vicar.selftest import GOLDEN_DIR

runner = CliRunner()


def _golden(tmp_path: Path, name: str) -> Path:
    target = tmp_path / f"{name}.vicar"
    shutil.copyfile(GOLDEN_DIR / f"{name}.vicar", target)
    return target


def test_analyze_variational_system(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """The worked rank-1 example should be reported as variational."""
    monkeypatch.chdir(tmp_path)
    _golden(tmp_path, "example2")
    result = runner.invoke(app, ["analyze", "example2.vicar"])
    assert result.exit_code == 0, result.output
    assert "BNII1" in result.output
    assert "Variational" in result.output


def test_analyze_report_is_reproducible(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Two runs with the same seed should write byte-identical reports."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv("VICAR_SEED", raising=False)
    _golden(tmp_path, "example2")

    first = runner.invoke(app, ["analyze", "example2.vicar", "--out", "first.json"])
    assert first.exit_code == 0, first.output
    second = runner.invoke(app, ["analyze", "example2.vicar", "--out", "second.json"])
    assert second.exit_code == 0, second.output

    text = (tmp_path / "first.json").read_text()
    assert text == (tmp_path / "second.json").read_text()
    report = Report.model_validate_json(text)
    assert report.problem == "example2"
    assert report.classification.verdict == "Variational"


def test_analyze_seed_flag(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """--seed should be recorded in the report."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("VICAR_SEED", "11")
    _golden(tmp_path, "free-particle")

    result = runner.invoke(app, ["analyze", "free-particle.vicar", "--seed", "5", "--out", "r.json"])
    assert result.exit_code == 0, result.output
    assert Report.model_validate_json((tmp_path / "r.json").read_text()).seed == 5

    result = runner.invoke(app, ["analyze", "free-particle.vicar", "--out", "r.json"])
    assert result.exit_code == 0, result.output
    assert Report.model_validate_json((tmp_path / "r.json").read_text()).seed == 11


def test_analyze_bad_seed_environment(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """A non-integer VICAR_SEED is an input error."""
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("VICAR_SEED", "abc")
    _golden(tmp_path, "free-particle")
    result = runner.invoke(app, ["analyze", "free-particle.vicar"])
    assert result.exit_code == 1, result.output
    assert "VICAR_SEED" in result.output


def test_analyze_invalid_problem(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Expression errors should be listed and exit 1."""
    monkeypatch.chdir(tmp_path)
    (tmp_path / "bad.vicar").write_text(
        "name: bad\nn: 1\ncoordinates: [x]\nvelocities: [u]\nequations: ['x +']\n"
    )
    result = runner.invoke(app, ["analyze", "bad.vicar"])
    assert result.exit_code == 1, result.output
    assert "1 error" in result.output


def test_analyze_missing_file(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    result = runner.invoke(app, ["analyze", "absent.vicar"])
    assert result.exit_code == 1, result.output
    assert "not found" in result.output


def test_analyze_inconclusive_classification(
    tmp_path: Path, monkeypatch: pytest.MonkeyPatch
) -> None:
    """An undecided classification exits 2 and still prints the summary."""
    monkeypatch.chdir(tmp_path)
    _golden(tmp_path, "free-particle")

    def undecided(geo, tester, eig=None, resolve=None) -> ClassificationReport:
        return ClassificationReport(
            case="Inconclusive",
            verdict=ClassificationVerdict.INCONCLUSIVE,
            caveats=["cannot decide whether Phi is a multiple of the identity"],
        )

    monkeypatch.setattr(pipeline, "classify", undecided)
    result = runner.invoke(app, ["analyze", "free-particle.vicar", "--out", "r.json"])
    assert result.exit_code == 2, result.output
    assert "Inconclusive" in result.output
    report = Report.model_validate_json((tmp_path / "r.json").read_text())
    assert report.classification.verdict == "Inconclusive"
