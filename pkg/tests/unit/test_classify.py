"""Tests for case detection, the step-1 rank and the rank-1 condition ledger."""

import pytest
import sympy

from vicar.algebra import DomainBox, SymbolTable, Verdict, ZeroTester, parse, tidy
from vicar.analysis.classify import (
    ClassificationVerdict,
    DegeneracyResult,
    TwoFormModule,
    a1_rank,
    cartan_generality,
    classify,
    degeneracy_condition,
    degenerate_check,
    douglas_note,
    sigma1_membership,
    sigma_tilde1_module,
)
from vicar.analysis.eigenframe import (
    Integrability,
    integrability_test,
    resolve_eigendata,
    structure_functions,
)
from vicar.geometry.sode import Sode, build_geometry
from vicar.pipeline import AnalysisSettings
from vicar.problem.loader import load_problem
from vicar.selftest import GOLDEN_DIR


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _classify_golden(name: str):
    problem = load_problem(GOLDEN_DIR / f"{name}.vicar")
    geo = build_geometry(problem.sode)
    tester = AnalysisSettings().tester(problem)
    resolve = {}
    if problem.eigenvalues is not None:
        resolve = {"eigenvalues": problem.eigenvalues, "vectors": problem.vectors}
    return problem, classify(geo, tester, resolve=resolve), tester


def _classify(*equations: str):
    n = len(equations)
    table = SymbolTable.build(["x", "y", "z"][:n], ["u", "v", "w"][:n])
    geo = build_geometry(Sode(table, tuple(parse(text, table) for text in equations)))
    return classify(geo, ZeroTester(geo.sode.box, table.jet))


def _constant_tester() -> ZeroTester:
    return ZeroTester(DomainBox(), ())


def _structure(name: str, scale: str | None = None):
    problem = load_problem(GOLDEN_DIR / f"{name}.vicar")
    geo = build_geometry(problem.sode)
    tester = AnalysisSettings().tester(problem)
    vectors = problem.vectors
    if scale is not None:
        factor = parse(scale, problem.symbols)
        vectors = [[factor * c for c in vector] for vector in vectors]
    eig = resolve_eigendata(geo, tester, problem.eigenvalues, vectors)
    return structure_functions(geo, eig, tester), tester


# ---------------------------------------------------------------------------
# Case detection
# ---------------------------------------------------------------------------

class TestCaseDetection:

    def test_free_particle_is_case_a(self):
        _, report, _ = _classify_golden("free-particle")
        assert report.case == "A"
        assert report.verdict is ClassificationVerdict.OUT_OF_SCOPE
        assert report.condition("C-A").verdict is Verdict.ZERO

    def test_single_equation_is_case_a(self):
        report = _classify("-x - u")
        assert report.case == "A"
        assert report.douglas is None

    def test_repeated_eigenvalues(self):
        _, report, _ = _classify_golden("repeated")
        assert report.case == "C-detected"
        assert report.verdict is ClassificationVerdict.OUT_OF_SCOPE
        assert "lambda2 = lambda3" in report.caveats[0]

    def test_non_diagonalizable(self):
        report = _classify("y", "0")
        assert report.case == "D-detected"
        assert report.douglas == "corresponds to Douglas's case IIb"

    def test_uncoupled_oscillators(self):
        report = _classify("-x", "-2*y")
        assert report.case == "B-q0"
        assert report.q == 0
        assert report.general_rank == 0
        assert report.sigma2_dimension == 2
        assert report.douglas == "corresponds to Douglas's case IIa1"


# ---------------------------------------------------------------------------
# Rank-1 subcase
# ---------------------------------------------------------------------------

class TestRankOneSubcase:

    def test_variational_system(self):
        _, report, _ = _classify_golden("example2")
        assert report.case == "BNII1"
        assert report.verdict is ClassificationVerdict.VARIATIONAL
        assert report.q == 2
        assert report.nonintegrable_labels == [1, 2]
        assert report.rank_a1 == 1
        assert report.h2 == -1
        assert report.failing() == []
        assert report.generality.text == "1 function of 2 variables"
        assert report.degeneracy.verdict == "Regular"
        assert report.degeneracy.maximal_rank

    def test_xi_tilde(self):
        problem, report, _ = _classify_golden("example2")
        xi = report.bnii.xi_tilde(report.bnii.i)
        expected = parse("-1/(2*t)", problem.symbols)
        assert tidy(xi.component(0) - expected) == 0

    def test_informational_conditions_never_fail(self):
        _, report, _ = _classify_golden("example2")
        assert report.condition("C-DI1").verdict is Verdict.NONZERO
        assert "C-DI1" not in [c.id for c in report.failing()]

    def test_pfaffian_system_lines(self):
        _, report, _ = _classify_golden("example2")
        assert report.pfaffian[0].startswith("xi~1_1 = ")
        assert report.pfaffian[-1].endswith("= -P_3 phi3V - Q_3 phi3H")

    def test_torsion_condition_fails(self):
        problem, report, _ = _classify_golden("example1")
        assert report.case == "BNII1"
        assert report.verdict is ClassificationVerdict.NOT_VARIATIONAL
        assert "C-56" in [c.id for c in report.failing()]
        assert tidy(report.h2 - parse("-4*v/(3*u^2)", problem.symbols)) == 0
        assert report.generality is None

    def test_differential_ideal_case(self):
        _, report, _ = _classify_golden("example3")
        assert report.case == "BNII0"
        assert report.verdict is ClassificationVerdict.OUT_OF_SCOPE
        assert report.rank_a1 == 0
        assert report.condition("C-DI1").verdict is Verdict.ZERO
        assert report.generality.text.endswith("(when the external existence conditions hold)")

    def test_regular_final_module_is_recorded(self):
        _, report, _ = _classify_golden("example2")
        record = report.condition("C-DEG")
        assert record.verdict is Verdict.ZERO
        assert record.detail == "rank 6 of 6"

    def test_rescaled_frame_keeps_integrability(self):
        non_integrable, integrable = Integrability.NON_INTEGRABLE, Integrability.INTEGRABLE
        expected = [non_integrable, non_integrable, integrable]
        for scale in (None, "t"):
            sf, tester = _structure("example2", scale)
            verdicts = [integrability_test(sf, a, tester).verdict for a in range(3)]
            assert verdicts == expected, scale


# ---------------------------------------------------------------------------
# Degeneracy and the cyclic step-1 condition
# ---------------------------------------------------------------------------

class TestDegeneracy:

    def test_full_module_is_regular(self):
        sf, tester = _structure("example2")
        result = degenerate_check(sigma_tilde1_module(sf, [1, 2, 3]), sf, tester)
        assert result.verdict == "Regular"
        assert result.missing == []
        assert result.rank == 6
        assert result.maximal_rank

    def test_single_form_is_not_regular(self):
        sf, tester = _structure("example2")
        module = TwoFormModule(step=2, basis=[("omega3", sf.omega(2))])
        result = degenerate_check(module, sf, tester)
        assert result.verdict == "NonRegular"
        assert result.missing == [1, 2]
        assert result.rank == 2
        assert not result.maximal_rank

    def test_missing_first_form(self):
        sf, tester = _structure("example2")
        module = TwoFormModule(step=2, basis=[("omega2", sf.omega(1)), ("omega3", sf.omega(2))])
        assert degenerate_check(module, sf, tester).missing == [1]

    def test_non_regular_module_fails_the_ledger(self):
        record = degeneracy_condition(DegeneracyResult("NonRegular", missing=[1], rank=4), 3)
        assert record.id == "C-DEG"
        assert record.verdict is Verdict.NONZERO
        assert record.detail == "missing omega1"

    def test_rank_deficient_module_fails_the_ledger(self):
        record = degeneracy_condition(DegeneracyResult("Regular", rank=4, maximal_rank=False), 3)
        assert record.verdict is Verdict.NONZERO
        assert record.detail == "rank 4 of 6"

    def test_undecided_module_is_inconclusive(self):
        result = DegeneracyResult("Inconclusive", rank=6, maximal_rank=True)
        record = degeneracy_condition(result, 3)
        assert record.verdict is Verdict.INCONCLUSIVE


class TestSigma1Membership:

    def test_two_degrees_of_freedom_is_vacuous(self):
        table = SymbolTable.build(["x", "y"], ["u", "v"])
        geo = build_geometry(Sode(table, (parse("-x", table), parse("-2*y", table))))
        tester = ZeroTester(geo.sode.box, table.jet)
        sf = structure_functions(geo, resolve_eigendata(geo, tester), tester)
        r = [parse("x*u", table), parse("y", table)]
        assert sigma1_membership(r, sf, tester) is Verdict.ZERO

    def test_vanishing_curvature_admits_any_r(self):
        sf, tester = _structure("example2")
        r = [sympy.Integer(1), sympy.Integer(2), sympy.Integer(3)]
        assert sigma1_membership(r, sf, tester) is Verdict.ZERO


# ---------------------------------------------------------------------------
# Helpers of the ledger
# ---------------------------------------------------------------------------

class TestA1Rank:

    @pytest.mark.parametrize("rows,expected", [
        ([(1, 2), (2, 4)], 1),
        ([(1, 0), (0, 1)], 2),
        ([(0, 0), (0, 0)], 0),
    ])
    def test_constant_rows(self, rows, expected):
        tester = _constant_tester()
        rows = [(sympy.Integer(p), sympy.Integer(q)) for p, q in rows]
        assert a1_rank(rows, tester)[0] == expected

    def test_nonvanishing_minor_is_returned(self):
        tester = _constant_tester()
        rows = [(sympy.Integer(1), sympy.Integer(0)), (sympy.Integer(0), sympy.Integer(3))]
        rank, minor = a1_rank(rows, tester)
        assert rank == 2
        assert minor == 3


class TestGenerality:

    @pytest.mark.parametrize("n,s2,text", [
        (2, 0, "no free functions at this level"),
        (3, 1, "1 function of 2 variables"),
        (5, 3, "3 functions of 2 variables"),
    ])
    def test_characters(self, n, s2, text):
        generality = cartan_generality(n)
        assert generality.s1 == generality.s2 == s2
        assert generality.t == 3 * s2
        assert generality.text == text


class TestDouglasNote:

    def test_only_for_two_degrees_of_freedom(self):
        assert douglas_note(3, "A", None, None) is None

    @pytest.mark.parametrize("case,rank,expected", [
        ("A", None, "corresponds to Douglas's case I"),
        ("B-q1", 0, "corresponds to Douglas's case IIa2"),
        ("BNII0", 0, "corresponds to Douglas's case IIa3"),
        ("BNII1", 1, "may correspond to case III of Douglas"),
        ("B-q1", 1, None),
    ])
    def test_cases(self, case, rank, expected):
        assert douglas_note(2, case, None, rank) == expected
