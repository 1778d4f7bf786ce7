"""Calculus and numeric evaluation on sympy expressions.

sympy's automatic canonicalization provides the structural normal form:
sums and products are flattened, constants folded, arguments ordered, and
``sqrt(e)`` is stored as ``e**(1/2)``. ``tidy`` adds rational cancellation
on top of that.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence
from functools import lru_cache

import sympy
from sympy.polys.polyerrors import PolynomialError

from vicar.errors import DomainEvaluationError

Expr = sympy.Expr


def tidy(expr: Expr) -> Expr:
    """Cancel common factors; fall back to the input when cancellation fails."""
    expr = sympy.sympify(expr)
    if expr.is_Atom:
        return expr
    try:
        return sympy.cancel(expr)
    except (PolynomialError, NotImplementedError, TypeError):
        return expr


def differentiate(expr: Expr, symbol: sympy.Symbol) -> Expr:
    return tidy(sympy.diff(expr, symbol))


def substitute(expr: Expr, bindings: Mapping[sympy.Symbol, object]) -> Expr:
    """Simultaneous substitution followed by cancellation."""
    replacements = {key: sympy.sympify(value) for key, value in bindings.items()}
    return tidy(sympy.sympify(expr).subs(replacements, simultaneous=True))


@lru_cache(maxsize=8192)
def _compiled(exprs: tuple[Expr, ...], symbols: tuple[sympy.Symbol, ...]) -> Callable:
    return sympy.lambdify(symbols, list(exprs), modules="math")


def compile_numeric(exprs: Sequence[Expr], symbols: Sequence[sympy.Symbol]) -> Callable:
    """Return ``f(*values) -> list[float]`` evaluating every expression at once."""
    return _compiled(tuple(sympy.sympify(e) for e in exprs), tuple(symbols))


def call_numeric(function: Callable, values: Sequence[float]) -> list[float]:
    """Invoke a compiled function, mapping real-domain failures to DomainEvaluationError."""
    try:
        results = function(*values)
    except (ValueError, ZeroDivisionError, OverflowError) as exc:
        raise DomainEvaluationError(str(exc)) from exc
    out: list[float] = []
    for value in results:
        if isinstance(value, complex):
            if value.imag != 0:
                raise DomainEvaluationError(f"complex value {value}")
            value = value.real
        value = float(value)
        if math.isnan(value) or math.isinf(value):
            raise DomainEvaluationError(f"non-finite value {value}")
        out.append(value)
    return out


def eval_numeric(expr: Expr, point: Mapping[sympy.Symbol, float]) -> float:
    """IEEE double value of ``expr`` at ``point``.

    Raises DomainEvaluationError on a negative radicand, a log of a non-positive
    number or a division by zero.
    """
    expr = sympy.sympify(expr)
    missing = expr.free_symbols - set(point)
    if missing:
        names = ", ".join(sorted(s.name for s in missing))
        raise KeyError(f"No value supplied for {names}")
    symbols = tuple(sorted(point, key=lambda s: s.name))
    function = compile_numeric([expr], symbols)
    return call_numeric(function, [float(point[s]) for s in symbols])[0]


def finite_difference(
    expr: Expr,
    symbol: sympy.Symbol,
    point: Mapping[sympy.Symbol, float],
    step: float = 1e-6,
) -> float:
    """Central difference approximation of d(expr)/d(symbol) at ``point``."""
    forward = dict(point)
    backward = dict(point)
    forward[symbol] = point[symbol] + step
    backward[symbol] = point[symbol] - step
    return (eval_numeric(expr, forward) - eval_numeric(expr, backward)) / (2 * step)
