"""Loading, validation and compilation of problem files."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import sympy
import yaml
from pydantic import ValidationError

from vicar.algebra.expr import call_numeric, compile_numeric, substitute, tidy
from vicar.algebra.parser import parse
from vicar.algebra.symbols import SymbolTable
from vicar.algebra.zero import DomainBox
from vicar.errors import DomainEvaluationError, ExpressionSyntaxError, ProblemFileError
from vicar.geometry.sode import Sode
from vicar.problem.model import ProblemFile

logger = logging.getLogger(__name__)


@dataclass
class CompiledProblem:
    """A validated problem with every expression parsed over its symbol table."""
    model: ProblemFile
    sode: Sode
    eigenvalues: list[sympy.Expr] | None = None
    vectors: list[list[sympy.Expr]] | None = None
    multiplier: list[list[sympy.Expr]] | None = None
    cartan_r: list[list[sympy.Expr]] | None = None
    r1_tilde: sympy.Expr | None = None
    r_alpha: dict[int, sympy.Expr] = field(default_factory=dict)

    @property
    def symbols(self) -> SymbolTable:
        return self.sode.symbols


def _pydantic_messages(label: str, error: ValidationError) -> list[str]:
    messages = []
    for err in error.errors():
        loc = " -> ".join(str(x) for x in err["loc"]) if err["loc"] else "root"
        messages.append(f"{label} [{loc}]: {err['msg']}")
    return messages


def read_problem(path: Path) -> ProblemFile:
    """Load and schema-validate a problem file; raises ProblemFileError."""
    if not path.exists():
        raise ProblemFileError([f"Problem file not found: {path}"])
    try:
        raw = yaml.safe_load(path.read_text())
    except yaml.YAMLError as e:
        raise ProblemFileError([f"Invalid YAML in {path.name}: {e}"]) from e
    if not isinstance(raw, dict):
        raise ProblemFileError(
            [f"Malformed problem file: {path.name}. Expected YAML mapping, got {type(raw).__name__}"]
        )
    try:
        return ProblemFile.model_validate(raw)
    except ValidationError as e:
        raise ProblemFileError(_pydantic_messages(path.name, e)) from e


def positive_symbols(problem: ProblemFile) -> set[str]:
    """Symbols assumed positive: bare-symbol guards and box intervals with a positive lower bound."""
    names = {guard.strip() for guard in problem.guards}
    names |= {name for name, (lower, _) in problem.box.items() if lower > 0}
    declared = {problem.time, *problem.coordinates, *problem.velocities}
    return names & declared


def _asymmetric_entries(rows: list[list[sympy.Expr | None]]) -> list[tuple[int, int]]:
    """Index pairs a < b where ``rows[a][b]`` and ``rows[b][a]`` differ after simplification."""
    pairs = []
    for a in range(len(rows)):
        for b in range(a + 1, len(rows)):
            upper, lower = rows[a][b], rows[b][a]
            if upper is None or lower is None:
                continue
            difference = tidy(upper - lower)
            if difference != 0 and sympy.simplify(difference) != 0:
                pairs.append((a, b))
    return pairs


def compile_problem(problem: ProblemFile, label: str = "problem") -> CompiledProblem:
    """Parse every expression of ``problem``; collects all failures into one ProblemFileError."""
    errors: list[str] = []
    try:
        symbols = SymbolTable.build(
            problem.coordinates,
            problem.velocities,
            time=problem.time,
            parameters=list(problem.parameters),
            positive=positive_symbols(problem),
        )
    except ValueError as e:
        raise ProblemFileError([f"{label}: {e}"]) from e

    values: dict[sympy.Symbol, sympy.Expr] = {}
    for name, text in problem.parameters.items():
        try:
            value = parse(text, SymbolTable.build([], [], time=problem.time))
        except ExpressionSyntaxError as e:
            errors.append(f"{label} [parameters -> {name}]: {e}")
            continue
        if not value.is_Rational:
            errors.append(f"{label} [parameters -> {name}]: value must be an exact rational, got '{text}'")
            continue
        values[symbols.lookup(name)] = value

    def expression(text: str, *loc) -> sympy.Expr | None:
        try:
            parsed = parse(text, symbols)
        except ExpressionSyntaxError as e:
            where = " -> ".join(str(x) for x in loc)
            errors.append(f"{label} [{where}]: {e}")
            return None
        return substitute(parsed, values) if values else parsed

    F = [expression(text, "equations", a + 1) for a, text in enumerate(problem.equations)]
    guards = [expression(text, "guards", k + 1) for k, text in enumerate(problem.guards)]

    eigenvalues = vectors = None
    if problem.eigen is not None and problem.eigen.eigenvalues is not None:
        eigenvalues = [
            expression(text, "eigen", "lambda", a + 1)
            for a, text in enumerate(problem.eigen.eigenvalues)
        ]
        vectors = [
            [expression(text, "eigen", "vectors", a + 1, c + 1) for c, text in enumerate(row)]
            for a, row in enumerate(problem.eigen.vectors)
        ]

    multiplier = None
    if problem.multiplier is not None:
        multiplier = [
            [expression(text, "multiplier", a + 1, b + 1) for b, text in enumerate(row)]
            for a, row in enumerate(problem.multiplier)
        ]
        for a, b in _asymmetric_entries(multiplier):
            errors.append(
                f"{label} [multiplier -> {a + 1} -> {b + 1}]: multiplier is not symmetric, "
                f"'{problem.multiplier[a][b]}' differs from '{problem.multiplier[b][a]}'"
            )

    cartan_r = None
    r1_tilde = None
    r_alpha: dict[int, sympy.Expr] = {}
    if problem.cartan is not None:
        if problem.cartan.r is not None:
            if problem.cartan.is_diagonal:
                diagonal = [
                    expression(text, "cartan", "r", a + 1) for a, text in enumerate(problem.cartan.r)
                ]
                zero = sympy.Integer(0)
                size = range(problem.n)
                cartan_r = [[diagonal[a] if a == b else zero for b in size] for a in size]
            else:
                cartan_r = [
                    [expression(text, "cartan", "r", a + 1, b + 1) for b, text in enumerate(row)]
                    for a, row in enumerate(problem.cartan.r)
                ]
        pfaffian = problem.cartan.pfaffian
        if pfaffian is not None:
            if pfaffian.r1_tilde is not None:
                r1_tilde = expression(pfaffian.r1_tilde, "cartan", "pfaffian", "r1_tilde")
            for user_label, text in sorted(pfaffian.r_alpha.items()):
                r_alpha[user_label] = expression(text, "cartan", "pfaffian", "r_alpha", user_label)

    if errors:
        raise ProblemFileError(errors)

    box = DomainBox({name: (float(lo), float(hi)) for name, (lo, hi) in problem.box.items()})
    try:
        sode = Sode(symbols=symbols, F=tuple(F), box=box, guards=tuple(guards), name=problem.name)
    except ValueError as e:
        raise ProblemFileError([f"{label}: {e}"]) from e
    logger.debug("Compiled problem %s (n=%d)", problem.name, problem.n)
    return CompiledProblem(
        model=problem,
        sode=sode,
        eigenvalues=eigenvalues,
        vectors=vectors,
        multiplier=multiplier,
        cartan_r=cartan_r,
        r1_tilde=r1_tilde,
        r_alpha=r_alpha,
    )


def guard_violations(compiled: CompiledProblem, seed: int | None = None) -> list[str]:
    """Guards that fail to be positive at a box corner or a seeded sample point."""
    sode = compiled.sode
    seed = compiled.model.seed if seed is None else seed
    messages = []
    for k, (guard, text) in enumerate(zip(sode.guards, compiled.model.guards)):
        symbols = [s for s in sode.symbols.jet if s in guard.free_symbols]
        points = sode.box.corners(symbols) + sode.box.sample(symbols, compiled.model.samples, seed)
        function = compile_numeric([guard], symbols)
        for point in points:
            try:
                value = call_numeric(function, [point[s] for s in symbols])[0]
            except DomainEvaluationError as e:
                value = None
                reason = str(e)
            else:
                reason = f"value {value:.6g}"
            if value is None or value <= 0:
                where = ", ".join(f"{s.name}={point[s]:.6g}" for s in symbols)
                messages.append(
                    f"[guards -> {k + 1}]: '{text}' is not positive on the box ({reason} at {where})"
                )
                break
    return messages


def load_problem(path: Path, seed: int | None = None) -> CompiledProblem:
    """Read, compile and guard-check a problem file; raises ProblemFileError.

    ``seed`` overrides the file's seed for the guard sample points.
    """
    problem = read_problem(path)
    compiled = compile_problem(problem, path.name)
    violations = guard_violations(compiled, seed)
    if violations:
        raise ProblemFileError([f"{path.name} {message}" for message in violations])
    return compiled


def validate_problem(path: Path, seed: int | None = None) -> list[str]:
    """Validate a problem file.

    Returns a list of error messages. Empty list means valid.
    """
    try:
        load_problem(path, seed)
    except ProblemFileError as e:
        return list(e.messages)
    return []
