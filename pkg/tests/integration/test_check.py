"""Integration tests for `vicar check`."""

from __future__ import annotations

import shutil
from pathlib import Path

import pytest
from typer.testing import CliRunner

from vicar.cli import app
from vicar.selftest import GOLDEN_DIR

runner = CliRunner()


@pytest.fixture
def golden(tmp_path: Path, monkeypatch: pytest.MonkeyPatch):
    monkeypatch.chdir(tmp_path)

    def copy(name: str) -> str:
        shutil.copyfile(GOLDEN_DIR / f"{name}.vicar", tmp_path / f"{name}.vicar")
        return f"{name}.vicar"

    return copy


def test_check_passing_candidates(golden) -> None:
    """Both candidates of the worked example pass."""
    result = runner.invoke(app, ["check", golden("example2")])
    assert result.exit_code == 0, result.output
    assert "Pass" in result.output
    assert "Fail" not in result.output


def test_check_failing_multiplier(golden) -> None:
    """The identity is not a multiplier: exit 3 and the failing condition is named."""
    result = runner.invoke(app, ["check", golden("example2-identity")])
    assert result.exit_code == 3, result.output
    assert "Fail" in result.output
    assert "phi[1][3]" in result.output


def test_check_asymmetric_multiplier(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    """An asymmetric multiplier is reported as an input error without a traceback."""
    monkeypatch.chdir(tmp_path)
    (tmp_path / "asym.vicar").write_text(
        "name: asym\nn: 2\ncoordinates: [x, y]\nvelocities: [u, v]\n"
        "equations: ['-x', '-2*y']\nmultiplier: [['1', 't'], ['0', '1']]\n"
    )
    result = runner.invoke(app, ["check", "asym.vicar"])
    assert result.exit_code == 1, result.output
    assert "symmetric" in result.output
    assert "Traceback" not in result.output
    assert not isinstance(result.exception, ValueError)


def test_check_without_candidate(golden) -> None:
    """A problem with nothing to check is an input error."""
    result = runner.invoke(app, ["check", golden("free-particle")])
    assert result.exit_code == 1, result.output
    assert "candidate" in result.output
