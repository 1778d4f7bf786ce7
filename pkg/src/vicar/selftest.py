"""Golden-corpus runner.

Each bundled problem ``golden/<name>.vicar`` has an expectation fixture
``golden/expected/<name>.yml``. A problem expands into rows named
``<name>-<aspect>`` plus ``<name>-property-<check>`` rows from the
property suite; ``--filter`` keeps the rows whose name contains it.
"""

from __future__ import annotations

import logging
from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

import sympy
import yaml
from pydantic import BaseModel, ValidationError

from vicar.algebra.expr import tidy
from vicar.algebra.parser import parse
from vicar.algebra.printer import to_source
from vicar.algebra.symbols import SymbolTable
from vicar.algebra.zero import Verdict, ZeroTester
from vicar.errors import VicarError
from vicar.pipeline import AnalysisOutcome, AnalysisSettings, analyze_problem, run_check
from vicar.problem.loader import CompiledProblem, load_problem
from vicar.problem.model import Expression
from vicar.properties import PropertyResult, check_cartan_characters, property_suite

logger = logging.getLogger(__name__)

GOLDEN_DIR = Path(__file__).parent / "golden"

ASPECTS = ("phi", "tau", "classification", "xi", "helmholtz", "pfaffian", "exit")
PROPERTY_NAMES = (
    "dd-zero",
    "commutators",
    "duality",
    "finite-differences",
    "roundtrip",
    "tau-consistency",
    "reconstruction",
    "equivalence-multiplier",
    "derivability-multiplier",
    "rescaling-multiplier",
    "equivalence-cartan",
    "derivability-cartan",
    "rescaling-cartan",
    "chain",
)


class GeneralityExpectation(BaseModel):
    s1: int
    s2: int
    t: int
    text: str


class PfaffianExpectation(BaseModel):
    verdict: str
    P: dict[int, Expression] = {}
    Q: dict[int, Expression] = {}


class Expectation(BaseModel):
    """Expected results for one golden problem; absent fields are not checked."""
    problem: str
    phi: list[list[Expression]] | None = None
    structure_functions: dict[str, Expression] = {}
    others_zero: bool = False
    case: str | None = None
    verdict: str | None = None
    q: int | None = None
    rank_a1: int | None = None
    h2: Expression | None = None
    failing: list[str] | None = None
    failing_includes: list[str] = []
    conditions: dict[str, str] = {}
    integrability: dict[int, str] = {}
    xi_tilde: dict[str, Expression] | None = None
    generality: GeneralityExpectation | None = None
    helmholtz: dict[str, str] = {}
    g: dict[str, list[list[Expression]]] = {}
    det: Expression | None = None
    pfaffian: PfaffianExpectation | None = None
    exit_code: int | None = None
    check_exit: int | None = None


@dataclass
class SelftestRow:
    name: str
    passed: bool
    detail: str = ""


@dataclass
class GoldenCase:
    name: str
    problem_path: Path
    expectation_path: Path


def discover(corpus: Path = GOLDEN_DIR) -> list[GoldenCase]:
    """Problems of ``corpus`` that have an expectation fixture, sorted by name."""
    cases = []
    for path in sorted((corpus / "expected").glob("*.yml")):
        name = path.stem
        problem = corpus / f"{name}.vicar"
        if problem.exists():
            cases.append(GoldenCase(name, problem, path))
    return cases


def load_expectation(path: Path) -> Expectation:
    raw = yaml.safe_load(path.read_text())
    return Expectation.model_validate(raw)


def row_names(name: str) -> list[str]:
    return [f"{name}-{aspect}" for aspect in ASPECTS] + [f"{name}-property-{p}" for p in PROPERTY_NAMES]


# ---------------------------------------------------------------------------
# Comparisons
# ---------------------------------------------------------------------------

class _Checker:
    """Collects mismatches between computed values and one expectation."""

    def __init__(self, symbols: SymbolTable, tester: ZeroTester):
        self.symbols = symbols
        self.tester = tester
        self.problems: list[str] = []

    def expr(self, label: str, computed: sympy.Expr | None, expected: str):
        if computed is None:
            self.problems.append(f"{label}: nothing computed, expected {expected}")
            return
        difference = tidy(sympy.sympify(computed) - parse(expected, self.symbols))
        if difference != 0 and self.tester.verdict(difference) is not Verdict.ZERO:
            self.problems.append(f"{label}: got {to_source(computed)}, expected {expected}")

    def structural(self, label: str, computed: sympy.Expr, expected: str):
        if tidy(sympy.sympify(computed) - parse(expected, self.symbols)) != 0:
            self.problems.append(f"{label}: got {to_source(computed)}, expected {expected}")

    def equal(self, label: str, computed, expected):
        if computed != expected:
            self.problems.append(f"{label}: got {computed}, expected {expected}")

    def row(self, name: str) -> SelftestRow:
        return SelftestRow(name, not self.problems, "; ".join(self.problems))


def _phi_row(
    name: str, exp: Expectation, outcome: AnalysisOutcome, checker: _Checker
) -> SelftestRow:
    phi = outcome.geometry.phi
    if len(exp.phi) != len(phi):
        checker.equal("size", len(phi), len(exp.phi))
    else:
        for a, row in enumerate(exp.phi):
            for b, text in enumerate(row):
                checker.structural(f"Phi[{a + 1}][{b + 1}]", phi[a][b], text)
    return checker.row(f"{name}-phi")


def _tau_row(
    name: str, exp: Expectation, outcome: AnalysisOutcome, checker: _Checker
) -> SelftestRow:
    sf = outcome.classification.sf
    if sf is None:
        checker.problems.append("no structure functions were computed")
        return checker.row(f"{name}-tau")
    table = dict(sf.entries())
    for entry, text in exp.structure_functions.items():
        if entry not in table:
            checker.problems.append(f"unknown structure function {entry}")
            continue
        checker.expr(entry, table[entry], text)
    if exp.others_zero:
        for entry, value in table.items():
            if entry not in exp.structure_functions:
                checker.expr(entry, value, "0")
    return checker.row(f"{name}-tau")


def _classification_row(
    name: str, exp: Expectation, outcome: AnalysisOutcome, checker: _Checker
) -> SelftestRow:
    report = outcome.classification
    if exp.case is not None:
        checker.equal("case", report.case, exp.case)
    if exp.verdict is not None:
        checker.equal("verdict", report.verdict.value, exp.verdict)
    if exp.q is not None:
        checker.equal("q", report.q, exp.q)
    if exp.rank_a1 is not None:
        checker.equal("rank A1", report.rank_a1, exp.rank_a1)
    if exp.h2 is not None:
        checker.expr("h2", report.h2, exp.h2)
    failing = sorted(c.id for c in report.failing())
    if exp.failing is not None:
        checker.equal("failing conditions", failing, sorted(exp.failing))
    for condition_id in exp.failing_includes:
        if condition_id not in failing:
            checker.problems.append(f"{condition_id} does not fail (failing: {failing})")
    for condition_id, verdict in exp.conditions.items():
        record = report.condition(condition_id)
        checker.equal(condition_id, record.verdict.value if record else None, verdict)
    census = {result.label: result.verdict.value for result in report.integrability}
    for label, verdict in exp.integrability.items():
        checker.equal(f"co-distribution {label}", census.get(label), verdict)
    if exp.generality is not None:
        g = report.generality
        computed = (g.s1, g.s2, g.t, g.text) if g else None
        expected = exp.generality
        checker.equal("generality", computed, (expected.s1, expected.s2, expected.t, expected.text))
    return checker.row(f"{name}-classification")


def _xi_row(
    name: str, exp: Expectation, outcome: AnalysisOutcome, checker: _Checker
) -> SelftestRow:
    bnii = outcome.classification.bnii
    if bnii is None:
        checker.problems.append("no rank-1 data")
        return checker.row(f"{name}-xi")
    form = bnii.xi_tilde(bnii.i)
    labels = form.frame.covector_labels
    for index, label in enumerate(labels):
        checker.expr(f"xi~ on {label}", form.component(index), exp.xi_tilde.get(label, "0"))
    return checker.row(f"{name}-xi")


def _helmholtz_row(
    name: str, exp: Expectation, outcome: AnalysisOutcome, checker: _Checker
) -> SelftestRow:
    sections = {section.source: section for section in outcome.helmholtz}
    for source, verdict in exp.helmholtz.items():
        section = sections.get(source)
        checker.equal(f"{source} verdict", section.verdict if section else None, verdict)
    for source, rows in exp.g.items():
        section = sections.get(source)
        if section is None:
            checker.problems.append(f"no {source} section")
            continue
        for a, row in enumerate(rows):
            for b, text in enumerate(row):
                checker.expr(f"{source} g[{a + 1}][{b + 1}]", parse(section.g[a][b], checker.symbols), text)
    if exp.det is not None:
        dets = [s.det for s in outcome.helmholtz if s.det is not None]
        for det in dets:
            checker.expr("det g", parse(det, checker.symbols), exp.det)
        if not dets:
            checker.problems.append("no symbolic determinant")
    return checker.row(f"{name}-helmholtz")


def _pfaffian_row(
    name: str, exp: Expectation, outcome: AnalysisOutcome, checker: _Checker
) -> SelftestRow:
    entries = [s.pfaffian for s in outcome.helmholtz if s.pfaffian is not None]
    if not entries:
        checker.problems.append("no Pfaffian candidate was checked")
        return checker.row(f"{name}-pfaffian")
    entry = entries[0]
    checker.equal("verdict", entry.verdict, exp.pfaffian.verdict)
    alphas = {alpha.label: alpha for alpha in entry.alphas}
    for label, text in exp.pfaffian.P.items():
        computed = alphas.get(label)
        checker.expr(f"P{label}", parse(computed.P, checker.symbols) if computed else None, text)
    for label, text in exp.pfaffian.Q.items():
        computed = alphas.get(label)
        checker.expr(f"Q{label}", parse(computed.Q, checker.symbols) if computed else None, text)
    return checker.row(f"{name}-pfaffian")


def _exit_row(
    name: str,
    exp: Expectation,
    outcome: AnalysisOutcome,
    checker: _Checker,
    problem: CompiledProblem,
    settings: AnalysisSettings,
) -> SelftestRow:
    if exp.exit_code is not None:
        checker.equal("analyze exit", outcome.exit_code, exp.exit_code)
    if exp.check_exit is not None:
        _, code = run_check(problem, settings)
        checker.equal("check exit", code, exp.check_exit)
    return checker.row(f"{name}-exit")


# ---------------------------------------------------------------------------
# Runner
# ---------------------------------------------------------------------------

def _property_rows(
    name: str, problem: CompiledProblem, outcome: AnalysisOutcome, settings: AnalysisSettings
):
    report = outcome.classification
    results: list[PropertyResult] = property_suite(
        outcome.geometry,
        outcome.tester,
        eig=report.eig,
        sf=report.sf,
        multiplier=problem.multiplier,
        cartan_r=problem.cartan_r,
        fd_step=settings.fd_step,
        fd_tolerance=settings.fd_tolerance,
    )
    return [SelftestRow(f"{name}-property-{r.name}", r.passed, r.detail) for r in results]


def run_case(case: GoldenCase, wanted: Callable[[str], bool]) -> list[SelftestRow]:
    """Analyse one golden problem and compare it with its expectation."""
    try:
        exp = load_expectation(case.expectation_path)
        problem = load_problem(case.problem_path)
        settings = AnalysisSettings(seed=problem.model.seed, samples=problem.model.samples)
        outcome = analyze_problem(problem, settings)
    except (VicarError, ValidationError, yaml.YAMLError) as e:
        return [SelftestRow(f"{case.name}-run", False, str(e))]

    def checker() -> _Checker:
        return _Checker(problem.symbols, outcome.tester)

    rows: list[SelftestRow] = []
    if exp.phi is not None and wanted(f"{case.name}-phi"):
        rows.append(_phi_row(case.name, exp, outcome, checker()))
    if exp.structure_functions and wanted(f"{case.name}-tau"):
        rows.append(_tau_row(case.name, exp, outcome, checker()))
    if wanted(f"{case.name}-classification"):
        rows.append(_classification_row(case.name, exp, outcome, checker()))
    if exp.xi_tilde is not None and wanted(f"{case.name}-xi"):
        rows.append(_xi_row(case.name, exp, outcome, checker()))
    if (exp.helmholtz or exp.g or exp.det) and wanted(f"{case.name}-helmholtz"):
        rows.append(_helmholtz_row(case.name, exp, outcome, checker()))
    if exp.pfaffian is not None and wanted(f"{case.name}-pfaffian"):
        rows.append(_pfaffian_row(case.name, exp, outcome, checker()))
    if (exp.exit_code is not None or exp.check_exit is not None) and wanted(f"{case.name}-exit"):
        try:
            rows.append(_exit_row(case.name, exp, outcome, checker(), problem, settings))
        except VicarError as e:
            rows.append(SelftestRow(f"{case.name}-exit", False, str(e)))
    properties = _property_rows(case.name, problem, outcome, settings)
    rows.extend(row for row in properties if wanted(row.name))
    return rows


def run_selftest(name_filter: str | None = None, corpus: Path = GOLDEN_DIR) -> list[SelftestRow]:
    """Every golden and property row whose name contains ``name_filter``."""

    def wanted(row: str) -> bool:
        return name_filter is None or name_filter in row

    rows: list[SelftestRow] = []
    for case in discover(corpus):
        if not any(wanted(row) for row in [f"{case.name}-run", *row_names(case.name)]):
            continue
        logger.debug("Selftest: %s", case.name)
        rows.extend(run_case(case, wanted))
    global_check = check_cartan_characters()
    if wanted(global_check.name):
        rows.append(SelftestRow(global_check.name, global_check.passed, global_check.detail))
    return rows
