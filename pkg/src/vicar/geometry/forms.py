"""Differential forms expanded in an anholonomic frame.

A ``Frame`` is a list of vector fields on the evolution space, given by their
coordinate components, together with the dual list of covectors. Brackets
and structure functions ``c^m_{ij} = e^m([E_i, E_j])`` are computed from the
components and cached.

A ``Form`` stores its components ``w(E_i1, ..., E_ik)`` on strictly
increasing multi-indices. Wedge products use the determinant convention
``(a ^ b)(X, Y) = a(X) b(Y) - a(Y) b(X)``.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence
from itertools import combinations, permutations

import sympy

from vicar.algebra.expr import tidy


def permutation_sign(indices: Sequence[int]) -> int:
    """Sign of the permutation sorting ``indices``; 0 when an index repeats."""
    if len(set(indices)) != len(indices):
        return 0
    sign = 1
    items = list(indices)
    for i in range(len(items)):
        for j in range(i + 1, len(items)):
            if items[i] > items[j]:
                sign = -sign
    return sign


def sort_indices(indices: Sequence[int]) -> tuple[int, tuple[int, ...]]:
    return permutation_sign(indices), tuple(sorted(indices))


class Frame:
    """A moving frame ``E_i`` with dual coframe ``e^i`` in coordinate components."""

    def __init__(
        self,
        vectors: Sequence[Sequence[sympy.Expr]],
        covectors: Sequence[Sequence[sympy.Expr]],
        coordinates: Sequence[sympy.Symbol],
        labels: Sequence[str] | None = None,
        covector_labels: Sequence[str] | None = None,
        simplify: Callable[[sympy.Expr], sympy.Expr] = tidy,
    ):
        self.vectors = [tuple(sympy.sympify(c) for c in v) for v in vectors]
        self.covectors = [tuple(sympy.sympify(c) for c in w) for w in covectors]
        self.coordinates = tuple(coordinates)
        self.dim = len(self.coordinates)
        if len(self.vectors) != self.dim or len(self.covectors) != self.dim:
            raise ValueError(f"A frame on a {self.dim}-dimensional space needs {self.dim} fields")
        self.labels = list(labels or [f"E{i}" for i in range(self.dim)])
        self.covector_labels = list(covector_labels or [f"e{i}" for i in range(self.dim)])
        self.simplify = simplify
        self._brackets: dict[tuple[int, int], tuple[sympy.Expr, ...]] = {}
        self._structure: dict[tuple[int, int], tuple[sympy.Expr, ...]] = {}

    @classmethod
    def coordinate(cls, coordinates: Sequence[sympy.Symbol]) -> Frame:
        """The holonomic frame ``d/dx^i`` with coframe ``dx^i``."""
        size = len(coordinates)
        identity = [[sympy.Integer(int(i == j)) for j in range(size)] for i in range(size)]
        names = [s.name for s in coordinates]
        return cls(
            identity,
            identity,
            coordinates,
            labels=[f"d/d{name}" for name in names],
            covector_labels=[f"d{name}" for name in names],
        )

    def apply(self, i: int, f: sympy.Expr) -> sympy.Expr:
        """Directional derivative ``E_i(f)``."""
        total = sympy.Integer(0)
        for component, coordinate in zip(self.vectors[i], self.coordinates):
            if component != 0:
                total += component * sympy.diff(f, coordinate)
        return self.simplify(total)

    def apply_vector(self, vector: Sequence[sympy.Expr], f: sympy.Expr) -> sympy.Expr:
        total = sympy.Integer(0)
        for component, coordinate in zip(vector, self.coordinates):
            if component != 0:
                total += component * sympy.diff(f, coordinate)
        return total

    def pairing(self, m: int, vector: Sequence[sympy.Expr]) -> sympy.Expr:
        """``e^m`` applied to a vector given in coordinate components."""
        return self.simplify(sum((a * b for a, b in zip(self.covectors[m], vector)), sympy.Integer(0)))

    def bracket(self, i: int, j: int) -> tuple[sympy.Expr, ...]:
        """Coordinate components of ``[E_i, E_j]``."""
        if i > j:
            return tuple(-c for c in self.bracket(j, i))
        key = (i, j)
        if key not in self._brackets:
            left, right = self.vectors[i], self.vectors[j]
            self._brackets[key] = tuple(
                self.simplify(self.apply_vector(left, right[k]) - self.apply_vector(right, left[k]))
                for k in range(self.dim)
            )
        return self._brackets[key]

    def structure(self, m: int, i: int, j: int) -> sympy.Expr:
        """Structure function ``c^m_{ij}`` with ``[E_i, E_j] = c^m_{ij} E_m``."""
        if i == j:
            return sympy.Integer(0)
        if i > j:
            return -self.structure(m, j, i)
        key = (i, j)
        if key not in self._structure:
            vector = self.bracket(i, j)
            self._structure[key] = tuple(self.pairing(k, vector) for k in range(self.dim))
        return self._structure[key][m]

    def duality_defects(self) -> list[tuple[int, int, sympy.Expr]]:
        """Entries of ``e^i(E_j) - delta^i_j`` that do not vanish structurally."""
        defects = []
        for i in range(self.dim):
            for j in range(self.dim):
                value = self.pairing(i, self.vectors[j]) - int(i == j)
                value = self.simplify(value)
                if value != 0:
                    defects.append((i, j, value))
        return defects

    def change_matrix(self, other: Frame) -> list[list[sympy.Expr]]:
        """``M[i][j] = e^i(E'_j)``: the old-frame components of the new frame vectors."""
        return [[self.pairing(i, other.vectors[j]) for j in range(self.dim)] for i in range(self.dim)]


def _minor(
    matrix: Sequence[Sequence[sympy.Expr]], rows: Sequence[int], cols: Sequence[int]
) -> sympy.Expr:
    if len(rows) == 1:
        return matrix[rows[0]][cols[0]]
    total = sympy.Integer(0)
    for perm in permutations(range(len(cols))):
        term = sympy.Integer(permutation_sign(perm))
        for r, p in zip(rows, perm):
            entry = matrix[r][cols[p]]
            if entry == 0:
                term = sympy.Integer(0)
                break
            term *= entry
        if term != 0:
            total += term
    return total


class Form:
    """A k-form with components on increasing multi-indices of its frame."""

    def __init__(
        self,
        frame: Frame,
        degree: int,
        components: dict[tuple[int, ...], sympy.Expr] | None = None,
    ):
        self.frame = frame
        self.degree = degree
        self.components: dict[tuple[int, ...], sympy.Expr] = {}
        for key, value in (components or {}).items():
            sign, ordered = sort_indices(key)
            if sign == 0 or len(ordered) != degree:
                continue
            value = sympy.sympify(value) * sign
            if value != 0:
                self.components[ordered] = self.components.get(ordered, 0) + value
        self.components = {k: v for k, v in self.components.items() if v != 0}

    # -- constructors ---------------------------------------------------------

    @classmethod
    def zero(cls, frame: Frame, degree: int) -> Form:
        return cls(frame, degree)

    @classmethod
    def scalar(cls, frame: Frame, value: sympy.Expr) -> Form:
        return cls(frame, 0, {(): value})

    @classmethod
    def coframe(cls, frame: Frame, i: int) -> Form:
        return cls(frame, 1, {(i,): sympy.Integer(1)})

    @classmethod
    def differential(cls, frame: Frame, f: sympy.Expr) -> Form:
        """``df`` expanded in the coframe: components ``E_i(f)``."""
        return cls(frame, 1, {(i,): frame.apply(i, f) for i in range(frame.dim)})

    @classmethod
    def from_covector(cls, frame: Frame, coordinate_components: Sequence[sympy.Expr]) -> Form:
        """A 1-form given on ``dx^k``, re-expanded in ``frame``."""
        components = {}
        for i, vector in enumerate(frame.vectors):
            value = sum((a * b for a, b in zip(coordinate_components, vector)), sympy.Integer(0))
            components[(i,)] = frame.simplify(value)
        return cls(frame, 1, components)

    @classmethod
    def combination(cls, frame: Frame, terms: Iterable[tuple[sympy.Expr, int]]) -> Form:
        """``sum coefficient * e^i`` over ``(coefficient, i)`` pairs."""
        components: dict[tuple[int, ...], sympy.Expr] = {}
        for coefficient, i in terms:
            components[(i,)] = components.get((i,), sympy.Integer(0)) + coefficient
        return cls(frame, 1, components)

    # -- access ---------------------------------------------------------------

    def component(self, *indices: int) -> sympy.Expr:
        sign, ordered = sort_indices(indices)
        if sign == 0:
            return sympy.Integer(0)
        return sign * self.components.get(ordered, sympy.Integer(0))

    def items(self):
        return sorted(self.components.items())

    def is_structurally_zero(self) -> bool:
        return not self.components

    def without(self, excluded: Iterable[int]) -> Form:
        """Components involving none of ``excluded``: the remainder modulo those covectors."""
        excluded = set(excluded)
        kept = {k: v for k, v in self.components.items() if not excluded.intersection(k)}
        return Form(self.frame, self.degree, kept)

    def tidied(self) -> Form:
        components = {k: self.frame.simplify(v) for k, v in self.components.items()}
        return Form(self.frame, self.degree, components)

    # -- algebra --------------------------------------------------------------

    def _check_compatible(self, other: Form):
        if other.frame is not self.frame:
            raise ValueError("Forms expanded in different frames; convert with in_frame() first")
        if other.degree != self.degree:
            raise ValueError(f"Cannot add a {self.degree}-form and a {other.degree}-form")

    def __add__(self, other: Form) -> Form:
        self._check_compatible(other)
        merged = dict(self.components)
        for key, value in other.components.items():
            merged[key] = merged.get(key, sympy.Integer(0)) + value
        return Form(self.frame, self.degree, merged).tidied()

    def __neg__(self) -> Form:
        return Form(self.frame, self.degree, {k: -v for k, v in self.components.items()})

    def __sub__(self, other: Form) -> Form:
        return self + (-other)

    def scale(self, factor: sympy.Expr) -> Form:
        return Form(self.frame, self.degree, {k: factor * v for k, v in self.components.items()}).tidied()

    def wedge(self, other: Form) -> Form:
        if other.frame is not self.frame:
            raise ValueError("Forms expanded in different frames; convert with in_frame() first")
        result: dict[tuple[int, ...], sympy.Expr] = {}
        for left, a in self.components.items():
            for right, b in other.components.items():
                sign, ordered = sort_indices(left + right)
                if sign == 0:
                    continue
                result[ordered] = result.get(ordered, sympy.Integer(0)) + sign * a * b
        return Form(self.frame, self.degree + other.degree, result).tidied()

    def __xor__(self, other: Form) -> Form:
        return self.wedge(other)

    # -- calculus -------------------------------------------------------------

    def exterior_derivative(self) -> Form:
        """``d`` of this form via the invariant formula over the frame.

        ``dw(E_0..E_k) = sum_p (-1)^p E_p(w(..^p..))
        + sum_{p<q} (-1)^{p+q} w([E_p, E_q], ..^p..^q..)``
        """
        frame = self.frame
        k = self.degree
        result: dict[tuple[int, ...], sympy.Expr] = {}
        for indices in combinations(range(frame.dim), k + 1):
            total = sympy.Integer(0)
            for p in range(k + 1):
                rest = indices[:p] + indices[p + 1:]
                value = self.component(*rest)
                if value != 0:
                    total += (-1) ** p * frame.apply(indices[p], value)
            if k >= 1:
                for p, q in combinations(range(k + 1), 2):
                    rest = tuple(i for r, i in enumerate(indices) if r not in (p, q))
                    for m in range(frame.dim):
                        value = self.component(m, *rest)
                        if value == 0:
                            continue
                        c = frame.structure(m, indices[p], indices[q])
                        if c != 0:
                            total += (-1) ** (p + q) * c * value
            total = frame.simplify(total)
            if total != 0:
                result[indices] = total
        return Form(frame, k + 1, result)

    def in_frame(self, target: Frame) -> Form:
        """Re-expand in ``target``: ``w'_J = sum_I w_I det M[I, J]`` with ``M = e^i(E'_j)``."""
        if target is self.frame:
            return self
        matrix = self.frame.change_matrix(target)
        result: dict[tuple[int, ...], sympy.Expr] = {}
        for new in combinations(range(target.dim), self.degree):
            total = sympy.Integer(0)
            for old, value in self.components.items():
                minor = _minor(matrix, old, new) if self.degree else sympy.Integer(1)
                if minor != 0:
                    total += value * minor
            total = target.simplify(total)
            if total != 0:
                result[new] = total
        return Form(target, self.degree, result)

    def evaluate(self, *vectors: int) -> sympy.Expr:
        """Value on frame vectors ``E_i`` given by index (antisymmetric in its arguments)."""
        if len(vectors) != self.degree:
            raise ValueError(f"A {self.degree}-form takes {self.degree} vectors")
        return self.component(*vectors)

    def describe(self) -> list[tuple[str, sympy.Expr]]:
        """Readable ``(e^i ^ e^j, coefficient)`` pairs in index order."""
        names = self.frame.covector_labels
        return [(" ^ ".join(names[i] for i in key) or "1", value) for key, value in self.items()]
