"""Tests for the reference-free property checks."""

import sympy

from vicar.algebra import SymbolTable, ZeroTester, parse
from vicar.analysis.eigenframe import resolve_eigendata, structure_functions
from vicar.analysis.helmholtz import Multiplier
from vicar.geometry.sode import Sode, build_geometry
from vicar.pipeline import AnalysisSettings
from vicar.problem.loader import load_problem
from vicar.properties import (
    check_cartan_characters,
    check_commutators,
    check_dd_zero,
    check_duality,
    check_equivalence,
    check_finite_differences,
    check_roundtrip,
    property_suite,
)
from vicar.selftest import GOLDEN_DIR


def _geometry(*equations: str):
    n = len(equations)
    table = SymbolTable.build(["x", "y", "z", "s"][:n], ["u", "v", "w", "r"][:n])
    geo = build_geometry(Sode(table, tuple(parse(text, table) for text in equations)))
    return geo, ZeroTester(geo.sode.box, table.jet)


class TestFrameProperties:

    def test_nonlinear_system(self):
        geo, tester = _geometry("x*v", "-u^2")
        assert check_dd_zero(geo, tester).passed
        assert check_commutators(geo, tester).passed
        assert check_duality(geo, None, tester).passed

    def test_four_degrees_of_freedom(self):
        geo, tester = _geometry("-x - y", "-y + z", "-z*u", "-s")
        assert check_commutators(geo, tester).passed
        assert check_finite_differences(geo, tester).passed

    def test_roundtrip(self):
        geo, tester = _geometry("sin(x) - u^2", "exp(-y)")
        result = check_roundtrip(geo, tester)
        assert result.passed
        assert result.detail == "6 expressions"

    def test_cartan_characters(self):
        result = check_cartan_characters()
        assert result.passed
        assert result.detail == "n = 2..8"


class TestEquivalence:

    def test_known_multiplier(self):
        problem = load_problem(GOLDEN_DIR / "example2.vicar")
        geo = build_geometry(problem.sode)
        tester = AnalysisSettings().tester(problem)
        results = check_equivalence(Multiplier.from_rows(problem.multiplier), geo, tester, "m")
        assert [r.name for r in results] == ["equivalence-m", "derivability-m", "rescaling-m"]
        assert all(r.passed for r in results)

    def test_failing_multiplier_still_agrees(self):
        geo, tester = _geometry("-x", "-2*y")
        g = Multiplier.from_rows([[sympy.Integer(1), geo.symbols.lookup("x")],
                                  [geo.symbols.lookup("x"), sympy.Integer(1)]])
        equivalence = check_equivalence(g, geo, tester, "m")[0]
        assert equivalence.passed
        assert "conditions NonZero" in equivalence.detail


class TestPropertySuite:

    def test_worked_example(self):
        problem = load_problem(GOLDEN_DIR / "example2.vicar")
        geo = build_geometry(problem.sode)
        tester = AnalysisSettings().tester(problem)
        eig = resolve_eigendata(geo, tester, problem.eigenvalues, problem.vectors)
        sf = structure_functions(geo, eig, tester)
        results = property_suite(
            geo, tester, eig, sf, multiplier=problem.multiplier, cartan_r=problem.cartan_r
        )
        failures = [(r.name, r.detail) for r in results if not r.passed]
        assert failures == []
        names = [r.name for r in results]
        assert "reconstruction" in names
        assert "chain" in names
