"""Print sympy expressions back into the problem-file grammar.

The output always re-parses to a structurally equal expression, so reports
and fixtures can be fed straight back into ``parse``.
"""

from __future__ import annotations

import sympy

ADD, NEG, MUL, POW, ATOM = 10, 15, 20, 30, 40

_FUNCTION_NAMES = {sympy.exp: "exp", sympy.log: "ln", sympy.sin: "sin", sympy.cos: "cos"}


def to_source(expr: sympy.Expr) -> str:
    """Render ``expr`` using ``^``, ``sqrt`` and ``ln`` as the parser expects."""
    return _render(sympy.sympify(expr), 0)


def _wrap(text: str, precedence: int, context: int) -> str:
    return f"({text})" if precedence < context else text


def _render(expr: sympy.Expr, context: int) -> str:
    text, precedence = _print(expr)
    return _wrap(text, precedence, context)


def _print(expr: sympy.Expr) -> tuple[str, int]:
    if expr.is_Integer:
        return (str(expr.p), NEG if expr < 0 else ATOM)
    if expr.is_Rational:
        text = f"{abs(expr.p)}/{expr.q}"
        return (f"-{text}", NEG) if expr < 0 else (text, MUL)
    if expr.is_Symbol:
        return (expr.name, ATOM)
    if expr is sympy.E:
        return ("exp(1)", ATOM)
    if expr.is_Add:
        return (_print_add(expr), ADD)
    if expr.is_Mul:
        return _print_mul(expr)
    if expr.is_Pow:
        return _print_pow(expr)
    if expr.func in _FUNCTION_NAMES:
        return (f"{_FUNCTION_NAMES[expr.func]}({_render(expr.args[0], 0)})", ATOM)
    raise ValueError(f"Cannot express {expr!r} in the problem-file grammar")


def _is_negative_term(term: sympy.Expr) -> bool:
    coefficient, _ = term.as_coeff_Mul()
    return coefficient.is_Number and coefficient < 0


def _print_add(expr: sympy.Expr) -> str:
    terms = expr.as_ordered_terms()
    parts = [_render(terms[0], ADD)]
    for term in terms[1:]:
        if _is_negative_term(term):
            parts.append(f" - {_render(-term, MUL)}")
        else:
            parts.append(f" + {_render(term, ADD + 1)}")
    return "".join(parts)


def _split_fraction(expr: sympy.Expr) -> tuple[sympy.Rational, list, list]:
    """Split a product into (numeric coefficient, numerator factors, denominator factors)."""
    coefficient, rest = expr.as_coeff_Mul()
    numerator: list[sympy.Expr] = []
    denominator: list[sympy.Expr] = []
    for factor in sympy.Mul.make_args(rest):
        if factor.is_Pow and factor.exp.is_Rational and factor.exp < 0:
            denominator.append(sympy.Pow(factor.base, -factor.exp))
        elif factor != 1:
            numerator.append(factor)
    return sympy.Rational(coefficient), numerator, denominator


def _print_mul(expr: sympy.Expr) -> tuple[str, int]:
    coefficient, numerator, denominator = _split_fraction(expr)
    negative = coefficient < 0
    coefficient = abs(coefficient)

    num_parts = [str(coefficient.p)] if coefficient.p != 1 else []
    num_parts += [_render(factor, POW) for factor in numerator]
    text = "*".join(num_parts) or "1"

    den_parts = [str(coefficient.q)] if coefficient.q != 1 else []
    den_parts += [_render(factor, POW) for factor in denominator]
    if len(den_parts) == 1:
        text = f"{text}/{den_parts[0]}"
    elif den_parts:
        text = f"{text}/({'*'.join(den_parts)})"

    if negative:
        return (f"-{text}", NEG)
    return (text, MUL if den_parts or len(num_parts) > 1 else POW)


def _print_pow(expr: sympy.Expr) -> tuple[str, int]:
    base, exponent = expr.base, expr.exp
    if not exponent.is_Rational:
        raise ValueError(f"Cannot express non-rational exponent in {expr!r}")
    if exponent < 0:
        return _print_mul(expr)
    if exponent == sympy.Rational(1, 2):
        return (f"sqrt({_render(base, 0)})", ATOM)
    power = str(exponent.p) if exponent.is_Integer else f"({exponent.p}/{exponent.q})"
    return (f"{_render(base, ATOM)}^{power}", POW)
