"""Zero-testing of expressions on a sampling box.

A test runs in tiers. A structurally zero expression is Zero at once.
Otherwise the expression is evaluated at seeded sample points: any value above
``nonzero_factor * atol`` makes it NonZero. Otherwise, whether every value is
below ``atol`` or some fall in the band between the two thresholds, the
result must be confirmed symbolically (cancellation, reduction of powers of
a common radicand, then ``sympy.simplify``) before it is reported Zero; if
confirmation fails the result is Inconclusive, never a silent Zero.
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from enum import Enum
from itertools import product

import numpy as np
import sympy
from sympy.polys.polyerrors import PolynomialError

from vicar.algebra.expr import call_numeric, compile_numeric
from vicar.errors import DomainEvaluationError

logger = logging.getLogger(__name__)

DEFAULT_INTERVAL = (-1.0, 1.0)


class Verdict(str, Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ZeroTest:
    """Outcome of one zero test, including which tier decided it."""
    verdict: Verdict
    path: str
    magnitude: float = 0.0
    witness: dict[str, float] | None = None

    @property
    def is_zero(self) -> bool:
        return self.verdict is Verdict.ZERO

    @property
    def is_nonzero(self) -> bool:
        return self.verdict is Verdict.NONZERO


def combine(verdicts: Iterable[Verdict]) -> Verdict:
    """Verdict of "all of these vanish": NonZero wins over Inconclusive over Zero."""
    seen = set(verdicts)
    if Verdict.NONZERO in seen:
        return Verdict.NONZERO
    if Verdict.INCONCLUSIVE in seen:
        return Verdict.INCONCLUSIVE
    return Verdict.ZERO


@dataclass(frozen=True)
class DomainBox:
    """Closed sampling interval per symbol name; unnamed symbols use DEFAULT_INTERVAL."""
    intervals: dict[str, tuple[float, float]] = field(default_factory=dict)

    def interval(self, name: str) -> tuple[float, float]:
        return self.intervals.get(name, DEFAULT_INTERVAL)

    def validate(self) -> list[str]:
        errors: list[str] = []
        for name, (lower, upper) in self.intervals.items():
            if not (math.isfinite(lower) and math.isfinite(upper)):
                errors.append(f"box for '{name}' must have finite bounds")
            elif lower >= upper:
                errors.append(f"box for '{name}' needs lower < upper, got [{lower}, {upper}]")
        return errors

    def sample(self, symbols: Sequence[sympy.Symbol], count: int, seed: int) -> list[dict]:
        rng = np.random.default_rng(seed)
        columns = {}
        for symbol in symbols:
            lower, upper = self.interval(symbol.name)
            columns[symbol] = rng.uniform(lower, upper, size=count)
        return [{s: float(columns[s][i]) for s in symbols} for i in range(count)]

    def corners(self, symbols: Sequence[sympy.Symbol]) -> list[dict]:
        bounds = [self.interval(s.name) for s in symbols]
        return [dict(zip(symbols, choice)) for choice in product(*bounds)]


class ZeroTester:
    """Seeded, caching zero tester bound to one problem's symbols and box."""

    def __init__(
        self,
        box: DomainBox,
        symbols: Sequence[sympy.Symbol],
        samples: int = 16,
        seed: int = 0,
        rtol: float = 1e-9,
        nonzero_factor: float = 10.0,
    ):
        self.box = box
        self.symbols = tuple(symbols)
        self.seed = seed
        self.rtol = rtol
        self.nonzero_factor = nonzero_factor
        self.points = box.sample(self.symbols, samples, seed)
        self.stats: Counter[str] = Counter()
        self._cache: dict[sympy.Expr, ZeroTest] = {}

    # -- numeric sampling ---------------------------------------------------

    def values(self, expr: sympy.Expr) -> list[float | None]:
        """Value of ``expr`` at every sample point (None where evaluation fails)."""
        function = compile_numeric([expr], self.symbols)
        out: list[float | None] = []
        for point in self.points:
            try:
                out.append(call_numeric(function, [point[s] for s in self.symbols])[0])
            except DomainEvaluationError:
                out.append(None)
        return out

    def value_at(self, expr: sympy.Expr, index: int = 0) -> float:
        function = compile_numeric([expr], self.symbols)
        point = self.points[index]
        return call_numeric(function, [point[s] for s in self.symbols])[0]

    def _sample(self, expr: sympy.Expr) -> tuple[Verdict | None, float, dict | None]:
        terms = sympy.Add.make_args(expr)
        function = compile_numeric(terms, self.symbols)
        largest = 0.0
        usable = 0
        below = True
        for point in self.points:
            try:
                values = call_numeric(function, [point[s] for s in self.symbols])
            except DomainEvaluationError:
                continue
            usable += 1
            total = math.fsum(values)
            atol = self.rtol * (1.0 + max(abs(v) for v in values))
            magnitude = abs(total)
            largest = max(largest, magnitude)
            if magnitude > self.nonzero_factor * atol:
                witness = {s.name: point[s] for s in self.symbols}
                return Verdict.NONZERO, magnitude, witness
            if magnitude >= atol:
                below = False
        if usable < max(1, len(self.points) // 2):
            return Verdict.INCONCLUSIVE, largest, None
        if not below:
            return Verdict.INCONCLUSIVE, largest, None
        return None, largest, None

    # -- public API -----------------------------------------------------------

    def test(self, expr: sympy.Expr) -> ZeroTest:
        expr = sympy.sympify(expr)
        cached = self._cache.get(expr)
        if cached is not None:
            return cached
        result = self._decide(expr)
        self._cache[expr] = result
        self.stats[result.verdict.value] += 1
        if result.verdict is Verdict.INCONCLUSIVE:
            logger.info("Inconclusive zero test (%s): %s", result.path, expr)
        return result

    def verdict(self, expr: sympy.Expr) -> Verdict:
        return self.test(expr).verdict

    def _decide(self, expr: sympy.Expr) -> ZeroTest:
        if expr == 0:
            return ZeroTest(Verdict.ZERO, "structural")
        if expr.is_Number:
            return ZeroTest(Verdict.NONZERO, "structural", abs(float(expr)))
        unknown = expr.free_symbols - set(self.symbols)
        if unknown:
            names = ", ".join(sorted(s.name for s in unknown))
            logger.info("Cannot sample undeclared symbols: %s", names)
            return ZeroTest(Verdict.INCONCLUSIVE, "undeclared-symbols")

        verdict, magnitude, witness = self._sample(expr)
        if verdict is Verdict.NONZERO:
            return ZeroTest(verdict, "numeric", magnitude, witness)
        path = confirm_zero(expr)
        if path is not None:
            return ZeroTest(Verdict.ZERO, path, magnitude)
        if verdict is Verdict.INCONCLUSIVE:
            return ZeroTest(verdict, "numeric-band", magnitude)
        return ZeroTest(Verdict.INCONCLUSIVE, "numeric-only", magnitude)

    def generic_rank(self, rows: Sequence[Sequence[sympy.Expr]], tol: float = 1e-8) -> int:
        """Largest numeric rank of the matrix over the sample points."""
        if not rows or not rows[0]:
            return 0
        flat = [sympy.sympify(entry) for row in rows for entry in row]
        function = compile_numeric(flat, self.symbols)
        width = len(rows[0])
        best = 0
        for point in self.points:
            try:
                values = call_numeric(function, [point[s] for s in self.symbols])
            except DomainEvaluationError:
                continue
            matrix = np.array(values, dtype=float).reshape(len(rows), width)
            scale = max(1.0, float(np.abs(matrix).max()))
            best = max(best, int(np.linalg.matrix_rank(matrix, tol=tol * scale)))
        return best


# ---------------------------------------------------------------------------
# Symbolic confirmation
# ---------------------------------------------------------------------------

def confirm_zero(expr: sympy.Expr) -> str | None:
    """Return the name of the symbolic pass that reduces ``expr`` to 0, or None."""
    try:
        if sympy.cancel(expr) == 0:
            return "cancel"
    except (PolynomialError, NotImplementedError, TypeError):
        pass
    try:
        if reduce_radicals(expr) == 0:
            return "radical"
    except (PolynomialError, NotImplementedError, TypeError, ValueError):
        pass
    try:
        if sympy.simplify(expr) == 0:
            return "simplify"
    except (NotImplementedError, TypeError, ValueError):
        pass
    return None


def reduce_radicals(expr: sympy.Expr) -> sympy.Expr:
    """Numerator of ``expr`` with every power of a common radicand made polynomial.

    Each base ``b`` carrying fractional exponents with common denominator ``L``
    is replaced by a positive dummy ``s`` with ``s**L = b``; the numerator is
    then reduced modulo ``s**L - b`` (or ``b`` is substituted when it is a
    symbol). A zero remainder proves the original expression zero.
    """
    numerator, _ = sympy.fraction(sympy.cancel(sympy.together(expr)))
    numerator = sympy.expand(numerator)
    bases: dict[sympy.Expr, set[sympy.Rational]] = {}
    for power in numerator.atoms(sympy.Pow):
        if power.exp.is_Rational and not power.exp.is_Integer:
            bases.setdefault(power.base, set()).add(power.exp)

    for base in sorted(bases, key=lambda b: (b.is_Symbol, sympy.default_sort_key(b))):
        exponents = bases[base]
        order = math.lcm(*(int(e.q) for e in exponents))
        root = sympy.Dummy("s", positive=True)
        numerator = numerator.xreplace({sympy.Pow(base, e): root ** int(e * order) for e in exponents})
        if base.is_Symbol:
            numerator = numerator.xreplace({base: root**order})
        numerator, _ = sympy.fraction(sympy.together(sympy.expand(numerator)))
        numerator = sympy.expand(numerator)
        if not base.is_Symbol and numerator.has(root):
            numerator = sympy.rem(numerator, root**order - base, root)
            numerator = sympy.expand(numerator)
    return numerator


def is_zero(
    expr: sympy.Expr,
    box: DomainBox | None = None,
    samples: int = 16,
    seed: int = 0,
    symbols: Sequence[sympy.Symbol] | None = None,
) -> ZeroTest:
    """One-off zero test; the analysis pipeline uses a shared ZeroTester instead."""
    expr = sympy.sympify(expr)
    box = box or DomainBox()
    if symbols is None:
        symbols = sorted(expr.free_symbols, key=lambda s: s.name)
    return ZeroTester(box, symbols, samples=samples, seed=seed).test(expr)


def point_names(point: Mapping[sympy.Symbol, float]) -> dict[str, float]:
    return {s.name: value for s, value in point.items()}
