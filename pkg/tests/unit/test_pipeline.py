"""Tests for seed resolution, the analysis pipeline and the check command's core."""

import json

import pytest

from vicar.errors import MissingCandidate
from vicar.pipeline import (
    EXIT_CHECK_FAILED,
    EXIT_OK,
    AnalysisSettings,
    analyze_problem,
    resolve_seed,
    run_check,
    settings_for,
)
from vicar.problem.loader import load_problem
from vicar.report import Report, report_schema
from vicar.selftest import GOLDEN_DIR


def _load(name: str):
    return load_problem(GOLDEN_DIR / f"{name}.vicar")


class TestSeedResolution:

    def test_flag_wins(self):
        assert resolve_seed(5, file_seed=1, environ={"VICAR_SEED": "3"}) == 5

    def test_environment_over_file(self):
        assert resolve_seed(None, file_seed=1, environ={"VICAR_SEED": "3"}) == 3

    def test_file_seed_last(self):
        assert resolve_seed(None, file_seed=1, environ={}) == 1

    def test_empty_environment_value_ignored(self):
        assert resolve_seed(None, file_seed=2, environ={"VICAR_SEED": ""}) == 2

    def test_no_override(self):
        assert resolve_seed(None, file_seed=None, environ={}) is None

    def test_bad_environment_value(self):
        with pytest.raises(ValueError, match="VICAR_SEED must be an integer"):
            resolve_seed(None, environ={"VICAR_SEED": "abc"})

    def test_settings_for(self, monkeypatch):
        monkeypatch.delenv("VICAR_SEED", raising=False)
        problem = _load("example2")
        settings = settings_for(problem, seed=9, samples=8)
        assert settings.seed == 9
        assert settings.samples == 8
        assert settings_for(problem).samples == problem.model.samples


class TestAnalyze:

    def test_variational_report(self):
        problem = _load("example2")
        outcome = analyze_problem(problem, AnalysisSettings())
        assert outcome.exit_code == EXIT_OK
        report = outcome.report
        assert report.classification.case == "BNII1"
        assert report.classification.verdict == "Variational"
        assert report.classification.h2 == "-1"
        assert [s.source for s in report.helmholtz] == ["multiplier", "cartan"]
        assert all(s.verdict == "Pass" for s in report.helmholtz)
        assert report.eigen.source == "supplied"

    def test_pfaffian_section(self):
        outcome = analyze_problem(_load("example2"), AnalysisSettings())
        pfaffian = outcome.report.helmholtz[1].pfaffian
        assert pfaffian.verdict == "Zero"
        assert pfaffian.alphas[0].label == 3
        assert pfaffian.alphas[0].P == "-1"

    def test_report_is_deterministic(self):
        problem = _load("example2")
        first = analyze_problem(problem, AnalysisSettings(seed=4)).report.to_json()
        second = analyze_problem(_load("example2"), AnalysisSettings(seed=4)).report.to_json()
        assert first == second
        assert Report.model_validate_json(first).seed == 4

    def test_out_of_scope_exits_zero(self):
        outcome = analyze_problem(_load("repeated"), AnalysisSettings())
        assert outcome.exit_code == EXIT_OK
        assert outcome.report.classification.case == "C-detected"
        assert outcome.report.caveats

    def test_zero_test_statistics(self):
        outcome = analyze_problem(_load("example2"), AnalysisSettings())
        stats = outcome.report.zero_tests
        assert list(stats) == sorted(stats)
        assert stats.get("Zero", 0) > 0


class TestCheck:

    def test_passing_candidates(self):
        sections, code = run_check(_load("example2"), AnalysisSettings())
        assert code == EXIT_OK
        assert [s.verdict for s in sections] == ["Pass", "Pass"]

    def test_failing_multiplier(self):
        sections, code = run_check(_load("example2-identity"), AnalysisSettings())
        assert code == EXIT_CHECK_FAILED
        assert sections[0].verdict == "Fail"

    def test_missing_candidate(self):
        with pytest.raises(MissingCandidate, match="neither a 'multiplier' nor a 'cartan.r'"):
            run_check(_load("free-particle"), AnalysisSettings())


class TestSchema:

    def test_schema_describes_report(self):
        schema = json.loads(report_schema())
        assert schema["title"] == "Report"
        assert "classification" in schema["properties"]
        assert "HelmholtzSection" in schema["$defs"]
