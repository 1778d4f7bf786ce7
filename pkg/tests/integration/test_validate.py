"""Integration tests for `vicar validate`."""

from __future__ import annotations

from pathlib import Path

import pytest
import yaml
from typer.testing import CliRunner

from vicar.cli import app
from vicar.problem import loader

runner = CliRunner()

VALID = {
    "name": "oscillators",
    "n": 2,
    "coordinates": ["x", "y"],
    "velocities": ["u", "v"],
    "equations": ["-x", "-2*y"],
}


def test_validate_valid_problem(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    (tmp_path / "ok.vicar").write_text(yaml.dump(VALID))
    result = runner.invoke(app, ["validate", "ok.vicar"])
    assert result.exit_code == 0, result.output
    assert "valid" in result.output.lower()


def test_validate_reports_every_error(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """Both broken equations should be reported in one run."""
    monkeypatch.chdir(tmp_path)
    (tmp_path / "bad.vicar").write_text(yaml.dump({**VALID, "equations": ["x +", "q"]}))
    result = runner.invoke(app, ["validate", "bad.vicar"])
    assert result.exit_code == 1, result.output
    assert "Found 2 error(s)" in result.output


def test_validate_guard_violation(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """A guard that is not positive on the box is an error."""
    monkeypatch.chdir(tmp_path)
    (tmp_path / "guard.vicar").write_text(yaml.dump({**VALID, "guards": ["x"]}))
    result = runner.invoke(app, ["validate", "guard.vicar"])
    assert result.exit_code == 1, result.output
    assert "positive" in result.output


def test_validate_schema_error(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    (tmp_path / "short.vicar").write_text(yaml.dump({**VALID, "equations": ["-x"]}))
    result = runner.invoke(app, ["validate", "short.vicar"])
    assert result.exit_code == 1, result.output
    assert "equations" in result.output


def test_validate_seed_override(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """--seed and VICAR_SEED pick the guard sample points."""
    monkeypatch.chdir(tmp_path)
    seen: list[int | None] = []
    original = loader.guard_violations

    def guard_violations(compiled, seed=None):
        seen.append(seed)
        return original(compiled, seed)

    monkeypatch.setattr(loader, "guard_violations", guard_violations)
    (tmp_path / "ok.vicar").write_text(yaml.dump({**VALID, "guards": ["t^2 + 1"]}))

    monkeypatch.setenv("VICAR_SEED", "4")
    result = runner.invoke(app, ["validate", "ok.vicar"])
    assert result.exit_code == 0, result.output
    result = runner.invoke(app, ["validate", "ok.vicar", "--seed", "7"])
    assert result.exit_code == 0, result.output
    monkeypatch.delenv("VICAR_SEED")
    result = runner.invoke(app, ["validate", "ok.vicar"])
    assert result.exit_code == 0, result.output
    assert seen == [4, 7, None]


def test_validate_bad_seed_environment(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("VICAR_SEED", "abc")
    (tmp_path / "ok.vicar").write_text(yaml.dump(VALID))
    result = runner.invoke(app, ["validate", "ok.vicar"])
    assert result.exit_code == 1, result.output
    assert "VICAR_SEED" in result.output
