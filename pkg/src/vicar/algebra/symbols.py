"""Symbol table for the evolution space: time, positions, velocities and parameters."""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass

import sympy

RESERVED_NAMES = frozenset({"sqrt", "exp", "ln", "sin", "cos"})


@dataclass(frozen=True)
class SymbolTable:
    """The declared symbols of one problem.

    Symbols listed in ``positive`` are created with ``positive=True`` so sympy
    folds powers of them (``v**(1/4) * v**(3/4) -> v``); all others are real.
    """
    time: sympy.Symbol
    coordinates: tuple[sympy.Symbol, ...]
    velocities: tuple[sympy.Symbol, ...]
    parameters: tuple[sympy.Symbol, ...] = ()

    @classmethod
    def build(
        cls,
        coordinates: Iterable[str],
        velocities: Iterable[str],
        time: str = "t",
        parameters: Iterable[str] = (),
        positive: Iterable[str] = (),
    ) -> SymbolTable:
        positive = set(positive)

        def make(name: str) -> sympy.Symbol:
            if name in RESERVED_NAMES:
                raise ValueError(f"'{name}' is a function name and cannot be declared as a symbol")
            if name in positive:
                return sympy.Symbol(name, positive=True)
            return sympy.Symbol(name, real=True)

        table = cls(
            time=make(time),
            coordinates=tuple(make(name) for name in coordinates),
            velocities=tuple(make(name) for name in velocities),
            parameters=tuple(make(name) for name in parameters),
        )
        if len(table.coordinates) != len(table.velocities):
            raise ValueError(
                f"{len(table.coordinates)} coordinates but {len(table.velocities)} velocities"
            )
        names = [s.name for s in table.all_symbols]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ValueError(f"Duplicate symbol names: {', '.join(duplicates)}")
        return table

    @property
    def n(self) -> int:
        return len(self.coordinates)

    @property
    def jet(self) -> tuple[sympy.Symbol, ...]:
        """Coordinates of the evolution space in frame order (t, x^1..x^n, u^1..u^n)."""
        return (self.time, *self.coordinates, *self.velocities)

    @property
    def all_symbols(self) -> tuple[sympy.Symbol, ...]:
        return (*self.jet, *self.parameters)

    @property
    def by_name(self) -> dict[str, sympy.Symbol]:
        return {s.name: s for s in self.all_symbols}

    def lookup(self, name: str) -> sympy.Symbol | None:
        return self.by_name.get(name)

    def position(self, a: int) -> sympy.Symbol:
        return self.coordinates[a]

    def velocity(self, a: int) -> sympy.Symbol:
        return self.velocities[a]
