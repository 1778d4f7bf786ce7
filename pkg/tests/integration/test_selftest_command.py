"""Integration tests for `vicar selftest`."""

from __future__ import annotations

import shutil
from pathlib import Path

from typer.testing import CliRunner

from vicar.cli import app
from vicar.selftest import GOLDEN_DIR

runner = CliRunner()


def test_selftest_filter() -> None:
    result = runner.invoke(app, ["selftest", "--filter", "example2-tau"])
    assert result.exit_code == 0, result.output
    assert "All 1 row(s) passed." in result.output


def test_selftest_filter_matching_nothing() -> None:
    result = runner.invoke(app, ["selftest", "--filter", "no-such-row"])
    assert result.exit_code == 1, result.output
    assert "no selftest rows match" in result.output


def test_selftest_corrupted_corpus(tmp_path: Path) -> None:
    """A wrong expected structure function fails its row with exit 3."""
    corpus = tmp_path / "golden"
    shutil.copytree(GOLDEN_DIR, corpus)
    expected = corpus / "expected" / "example2.yml"
    expected.write_text(
        expected.read_text().replace('"tauGamma[1][1]": 1/(4*t)', '"tauGamma[1][1]": 1/(2*t)')
    )

    result = runner.invoke(
        app, ["selftest", "--corpus", str(corpus), "--filter", "example2-tau"]
    )
    assert result.exit_code == 3, result.output
    assert "failed: example2-tau" in result.output
