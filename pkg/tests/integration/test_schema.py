"""Integration tests for `vicar schema`."""

from __future__ import annotations

import json
from pathlib import Path

import pytest
from typer.testing import CliRunner

from vicar.cli import app
from vicar.report import report_schema

runner = CliRunner()


def test_schema_printed() -> None:
    result = runner.invoke(app, ["schema"])
    assert result.exit_code == 0, result.output
    assert json.loads(result.stdout)["title"] == "Report"


def test_schema_written(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.chdir(tmp_path)
    result = runner.invoke(app, ["schema", "--out", "schema.json"])
    assert result.exit_code == 0, result.output
    assert (tmp_path / "schema.json").read_text() == report_schema()
