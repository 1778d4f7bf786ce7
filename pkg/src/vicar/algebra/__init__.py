"""Expression kernel: parsing, printing, calculus and zero-testing over sympy."""

from vicar.algebra.expr import differentiate, eval_numeric, substitute, tidy
from vicar.algebra.parser import parse
from vicar.algebra.printer import to_source
from vicar.algebra.symbols import SymbolTable
from vicar.algebra.zero import DomainBox, Verdict, ZeroTest, ZeroTester, is_zero

__all__ = [
    "DomainBox",
    "SymbolTable",
    "Verdict",
    "ZeroTest",
    "ZeroTester",
    "differentiate",
    "eval_numeric",
    "is_zero",
    "parse",
    "substitute",
    "tidy",
    "to_source",
]
