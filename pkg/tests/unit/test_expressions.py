"""Tests for the expression kernel: parser, printer and calculus helpers."""

import pytest
import sympy

from vicar.algebra import (
    SymbolTable,
    differentiate,
    eval_numeric,
    parse,
    substitute,
    tidy,
    to_source,
)
from vicar.algebra.expr import finite_difference
from vicar.errors import DomainEvaluationError, ExpressionSyntaxError, UnknownIdentifier


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _table(**overrides) -> SymbolTable:
    defaults = {
        "coordinates": ["x", "y", "z"],
        "velocities": ["u", "v", "w"],
        "positive": ["t", "v"],
    }
    defaults.update(overrides)
    return SymbolTable.build(**defaults)


def _sym(table: SymbolTable, name: str) -> sympy.Symbol:
    return table.lookup(name)


# ---------------------------------------------------------------------------
# Symbol table
# ---------------------------------------------------------------------------

class TestSymbolTable:

    def test_jet_order(self):
        table = _table()
        assert [s.name for s in table.jet] == ["t", "x", "y", "z", "u", "v", "w"]

    def test_positive_symbols(self):
        table = _table()
        assert _sym(table, "v").is_positive
        assert not _sym(table, "x").is_positive

    def test_reserved_name_rejected(self):
        with pytest.raises(ValueError, match="function name"):
            SymbolTable.build(["sqrt"], ["u"])

    def test_duplicate_names_rejected(self):
        with pytest.raises(ValueError, match="Duplicate"):
            SymbolTable.build(["x"], ["x"])

    def test_mismatched_counts_rejected(self):
        with pytest.raises(ValueError, match="velocities"):
            SymbolTable.build(["x", "y"], ["u"])


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

class TestParser:

    def test_polynomial(self):
        table = _table()
        x, v = _sym(table, "x"), _sym(table, "v")
        assert parse("x*v + 1/2", table) == x * v + sympy.Rational(1, 2)

    def test_rational_exponent(self):
        table = _table()
        v = _sym(table, "v")
        assert parse("v^(3/4)", table) == v ** sympy.Rational(3, 4)
        assert parse("v^(-1/4)", table) == v ** sympy.Rational(-1, 4)

    def test_unary_minus_binds_looser_than_power(self):
        table = _table()
        x = _sym(table, "x")
        assert parse("-x^2", table) == -(x**2)

    def test_functions(self):
        table = _table()
        t = _sym(table, "t")
        assert parse("sqrt(t)", table) == sympy.sqrt(t)
        assert parse("ln(t) + exp(t)", table) == sympy.log(t) + sympy.exp(t)

    def test_decimal_rejected(self):
        with pytest.raises(ExpressionSyntaxError, match="Decimal literal"):
            parse("0.5*x", _table())

    def test_unknown_identifier(self):
        with pytest.raises(UnknownIdentifier, match="Unknown identifier 'q'"):
            parse("x + q", _table())

    def test_error_position(self):
        with pytest.raises(ExpressionSyntaxError) as excinfo:
            parse("x + * y", _table())
        assert excinfo.value.position == 4

    def test_empty_expression(self):
        with pytest.raises(ExpressionSyntaxError, match="Empty expression"):
            parse("   ", _table())

    def test_division_by_zero(self):
        with pytest.raises(ExpressionSyntaxError, match="Division by zero"):
            parse("x/0", _table())

    def test_unclosed_parenthesis(self):
        with pytest.raises(ExpressionSyntaxError, match="end of input"):
            parse("(x + y", _table())


# ---------------------------------------------------------------------------
# Printer
# ---------------------------------------------------------------------------

class TestPrinter:

    @pytest.mark.parametrize("source", [
        "x*v",
        "-x/4",
        "-(4*v + x)/4",
        "u/(2*v^(3/4))",
        "sqrt(t)",
        "x^2 - 2*u",
        "ln(t) + exp(x)",
        "(sqrt(w^2 - 2*u) - w)/2",
    ])
    def test_reparses_to_same_expression(self, source):
        table = _table()
        expr = parse(source, table)
        assert parse(to_source(expr), table) == expr

    def test_sqrt_printed_as_function(self):
        table = _table()
        assert to_source(sympy.sqrt(_sym(table, "t"))) == "sqrt(t)"

    def test_unprintable_expression(self):
        with pytest.raises(ValueError, match="Cannot express"):
            to_source(sympy.tan(sympy.Symbol("x")))


# ---------------------------------------------------------------------------
# Calculus and evaluation
# ---------------------------------------------------------------------------

class TestCalculus:

    def test_tidy_cancels(self):
        x = sympy.Symbol("x")
        assert tidy((x**2 - 1) / (x - 1)) == x + 1

    def test_differentiate(self):
        table = _table()
        x, v = _sym(table, "x"), _sym(table, "v")
        assert differentiate(x * v**2, v) == 2 * x * v

    def test_substitute(self):
        x, y = sympy.symbols("x y")
        assert substitute(x + y, {x: y, y: x}) == x + y
        assert substitute(x * y, {x: 2}) == 2 * y

    def test_eval_numeric(self):
        x = sympy.Symbol("x")
        assert eval_numeric(x**2 + 1, {x: 2.0}) == pytest.approx(5.0)

    def test_eval_outside_real_domain(self):
        x = sympy.Symbol("x", real=True)
        with pytest.raises(DomainEvaluationError):
            eval_numeric(sympy.sqrt(x), {x: -1.0})

    def test_eval_missing_symbol(self):
        x, y = sympy.symbols("x y")
        with pytest.raises(KeyError, match="y"):
            eval_numeric(x + y, {x: 1.0})

    def test_finite_difference_matches_derivative(self):
        x = sympy.Symbol("x")
        derivative = finite_difference(sympy.sin(x), x, {x: 0.3})
        assert derivative == pytest.approx(float(sympy.cos(0.3)), rel=1e-6)
