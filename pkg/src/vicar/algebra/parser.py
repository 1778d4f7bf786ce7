"""Tokenizer and recursive-descent parser for problem-file expressions.

Grammar::

    expr     := term (('+' | '-') term)*
    term     := factor (('*' | '/') factor)*
    factor   := '-' factor | base ('^' exponent)?
    base     := INTEGER | IDENT | '(' expr ')' | FUNC '(' expr ')'
    exponent := INTEGER | '-' INTEGER | '(' '-'? INTEGER ('/' INTEGER)? ')'

Numbers are exact integers; rationals are written as quotients (``1/2``).
Decimal literals are rejected so that every constant stays exact.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import sympy

from vicar.algebra.symbols import SymbolTable
from vicar.errors import ExpressionSyntaxError, UnknownIdentifier

TOKEN_TYPES = [
    ("FLOAT", r"\d+\.\d*|\.\d+|\d+[eE][+-]?\d+"),
    ("INTEGER", r"\d+"),
    ("IDENT", r"[A-Za-z_][A-Za-z0-9_]*"),
    ("PLUS", r"\+"),
    ("MINUS", r"-"),
    ("STAR", r"\*"),
    ("SLASH", r"/"),
    ("CARET", r"\^"),
    ("LPAREN", r"\("),
    ("RPAREN", r"\)"),
    ("WHITESPACE", r"\s+"),
    ("MISMATCH", r"."),
]

token_pattern = re.compile("|".join(f"(?P<{name}>{pattern})" for name, pattern in TOKEN_TYPES))

FUNCTIONS = {
    "sqrt": sympy.sqrt,
    "exp": sympy.exp,
    "ln": sympy.log,
    "sin": sympy.sin,
    "cos": sympy.cos,
}


@dataclass(frozen=True)
class Token:
    type: str
    value: str
    position: int


def tokenize(source: str) -> list[Token]:
    """Split ``source`` into tokens, dropping whitespace."""
    tokens: list[Token] = []
    for match in token_pattern.finditer(source):
        kind = match.lastgroup
        value = match.group()
        position = match.start()
        if kind == "WHITESPACE":
            continue
        if kind == "FLOAT":
            raise ExpressionSyntaxError(
                f"Decimal literal '{value}' is not allowed; write it as a quotient of integers",
                source,
                position,
            )
        if kind == "MISMATCH":
            raise ExpressionSyntaxError(f"Unexpected character '{value}'", source, position)
        tokens.append(Token(kind, value, position))
    return tokens


class ExpressionParser:
    """Builds a sympy expression from a token stream."""

    def __init__(self, source: str, symbols: SymbolTable):
        self.source = source
        self.symbols = symbols
        self.tokens = tokenize(source)
        self.pos = 0

    # -- token helpers ------------------------------------------------------

    def peek(self) -> Token | None:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos]
        return None

    def match(self, *expected_types: str) -> Token | None:
        token = self.peek()
        if token and token.type in expected_types:
            self.pos += 1
            return token
        return None

    def expect(self, expected_type: str, what: str) -> Token:
        token = self.match(expected_type)
        if token is None:
            self._fail(f"Expected {what}")
        return token

    def _fail(self, message: str, token: Token | None = None):
        token = token or self.peek()
        if token is None:
            raise ExpressionSyntaxError(
                f"{message} but reached end of input", self.source, len(self.source)
            )
        raise ExpressionSyntaxError(f"{message}, got '{token.value}'", self.source, token.position)

    # -- grammar ------------------------------------------------------------

    def parse(self) -> sympy.Expr:
        if not self.tokens:
            raise ExpressionSyntaxError("Empty expression", self.source, 0)
        result = self.parse_expression()
        if self.peek() is not None:
            self._fail("Unexpected token")
        return result

    def parse_expression(self) -> sympy.Expr:
        left = self.parse_term()
        while True:
            if self.match("PLUS"):
                left = left + self.parse_term()
            elif self.match("MINUS"):
                left = left - self.parse_term()
            else:
                return left

    def parse_term(self) -> sympy.Expr:
        left = self.parse_factor()
        while True:
            if self.match("STAR"):
                left = left * self.parse_factor()
            elif token := self.match("SLASH"):
                right = self.parse_factor()
                if right == 0:
                    raise ExpressionSyntaxError("Division by zero", self.source, token.position)
                left = left / right
            else:
                return left

    def parse_factor(self) -> sympy.Expr:
        if self.match("MINUS"):
            return -self.parse_factor()
        base = self.parse_base()
        if caret := self.match("CARET"):
            exponent = self.parse_exponent()
            if base == 0 and exponent < 0:
                raise ExpressionSyntaxError("Zero raised to a negative power", self.source, caret.position)
            return sympy.Pow(base, exponent)
        return base

    def parse_exponent(self) -> sympy.Rational:
        if token := self.match("INTEGER"):
            return sympy.Integer(token.value)
        if self.match("MINUS"):
            return -sympy.Integer(self.expect("INTEGER", "an integer exponent").value)
        if self.match("LPAREN"):
            sign = -1 if self.match("MINUS") else 1
            numerator = sympy.Integer(self.expect("INTEGER", "an integer in the exponent").value)
            denominator = sympy.Integer(1)
            if self.match("SLASH"):
                token = self.expect("INTEGER", "an integer denominator")
                denominator = sympy.Integer(token.value)
                if denominator == 0:
                    raise ExpressionSyntaxError("Zero denominator in exponent", self.source, token.position)
            self.expect("RPAREN", "')' closing the exponent")
            return sign * sympy.Rational(numerator, denominator)
        self._fail("Expected a rational exponent")

    def parse_base(self) -> sympy.Expr:
        if token := self.match("INTEGER"):
            return sympy.Integer(token.value)

        if token := self.match("IDENT"):
            if token.value in FUNCTIONS:
                self.expect("LPAREN", f"'(' after {token.value}")
                argument = self.parse_expression()
                self.expect("RPAREN", f"')' closing {token.value}(")
                if token.value == "ln" and argument == 0:
                    raise ExpressionSyntaxError("ln(0) is undefined", self.source, token.position)
                return FUNCTIONS[token.value](argument)
            symbol = self.symbols.lookup(token.value)
            if symbol is None:
                declared = ", ".join(s.name for s in self.symbols.all_symbols)
                raise UnknownIdentifier(
                    f"Unknown identifier '{token.value}' (declared: {declared})",
                    self.source,
                    token.position,
                )
            return symbol

        if self.match("LPAREN"):
            inner = self.parse_expression()
            self.expect("RPAREN", "')'")
            return inner

        self._fail("Expected a number, identifier or '('")


def parse(source: str, symbols: SymbolTable) -> sympy.Expr:
    """Parse ``source`` into a canonical sympy expression over ``symbols``."""
    return ExpressionParser(source, symbols).parse()
