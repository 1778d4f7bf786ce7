"""Geometry of a second-order ODE system on the evolution space (t, x^a, u^a).

For ``xddot^a = F^a(t, x, u)`` this module builds the connection
coefficients, the Jacobi endomorphism, the curvature of the horizontal
distribution and the adapted frame ``{Gamma, H_a, V_a}`` with its dual
coframe ``{dt, theta^a, psi^a}``.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from functools import cached_property

import sympy

from vicar.algebra.expr import differentiate, tidy
from vicar.algebra.symbols import SymbolTable
from vicar.algebra.zero import DomainBox
from vicar.geometry.forms import Form, Frame

logger = logging.getLogger(__name__)

Matrix = list[list[sympy.Expr]]


@dataclass(frozen=True)
class Sode:
    """A system ``xddot^a = F^a`` with its sampling box and positivity guards."""
    symbols: SymbolTable
    F: tuple[sympy.Expr, ...]
    box: DomainBox = field(default_factory=DomainBox)
    guards: tuple[sympy.Expr, ...] = ()
    name: str = "sode"

    def __post_init__(self):
        if len(self.F) != self.symbols.n:
            raise ValueError(f"{len(self.F)} equations for {self.symbols.n} coordinates")
        declared = set(self.symbols.all_symbols)
        for a, rhs in enumerate(self.F):
            stray = sympy.sympify(rhs).free_symbols - declared
            if stray:
                names = ", ".join(sorted(s.name for s in stray))
                raise ValueError(f"F^{a + 1} uses undeclared symbols: {names}")

    @property
    def n(self) -> int:
        return self.symbols.n


@dataclass
class GeometryData:
    """Gamma^a_b, Phi^a_b and R^d_{ab} (stored for a < b) of one Sode."""
    sode: Sode
    gamma: Matrix
    phi: Matrix
    curvature_upper: dict[tuple[int, int, int], sympy.Expr]

    @property
    def n(self) -> int:
        return self.sode.n

    @property
    def symbols(self) -> SymbolTable:
        return self.sode.symbols

    def R(self, d: int, a: int, b: int) -> sympy.Expr:
        """Curvature component ``R^d_{ab}``; antisymmetric in (a, b)."""
        if a == b:
            return sympy.Integer(0)
        if a > b:
            return -self.curvature_upper[(d, b, a)]
        return self.curvature_upper[(d, a, b)]

    @cached_property
    def frame(self) -> Frame:
        return adapted_frame(self)

    def gamma_index(self) -> int:
        return 0

    def h_index(self, a: int) -> int:
        return 1 + a

    def v_index(self, a: int) -> int:
        return 1 + self.n + a


# ---------------------------------------------------------------------------
# Component computations
# ---------------------------------------------------------------------------

def connection_coefficients(sode: Sode) -> Matrix:
    """``Gamma^a_b = -1/2 dF^a/du^b``."""
    u = sode.symbols.velocities
    return [[tidy(-differentiate(F, u[b]) / 2) for b in range(sode.n)] for F in sode.F]


def total_derivative(sode: Sode, f: sympy.Expr) -> sympy.Expr:
    """``Gamma(f) = df/dt + u^a df/dx^a + F^a df/du^a``."""
    s = sode.symbols
    total = sympy.diff(f, s.time)
    for a in range(sode.n):
        total += s.velocity(a) * sympy.diff(f, s.position(a))
        total += sode.F[a] * sympy.diff(f, s.velocity(a))
    return tidy(total)


def jacobi_endomorphism(sode: Sode, gamma: Matrix | None = None) -> Matrix:
    """``Phi^a_b = -dF^a/dx^b - Gamma^c_b Gamma^a_c - Gamma(Gamma^a_b)``."""
    gamma = gamma if gamma is not None else connection_coefficients(sode)
    x = sode.symbols.coordinates
    n = sode.n
    phi: Matrix = []
    for a in range(n):
        row = []
        for b in range(n):
            value = -sympy.diff(sode.F[a], x[b])
            value -= sum((gamma[c][b] * gamma[a][c] for c in range(n)), sympy.Integer(0))
            value -= total_derivative(sode, gamma[a][b])
            row.append(tidy(value))
        phi.append(row)
    return phi


def horizontal_derivative(sode: Sode, gamma: Matrix, a: int, f: sympy.Expr) -> sympy.Expr:
    """``H_a(f) = df/dx^a - Gamma^b_a df/du^b``."""
    s = sode.symbols
    total = sympy.diff(f, s.position(a))
    for b in range(sode.n):
        total -= gamma[b][a] * sympy.diff(f, s.velocity(b))
    return tidy(total)


def curvature(sode: Sode, gamma: Matrix | None = None) -> dict[tuple[int, int, int], sympy.Expr]:
    """``R^d_{ab}`` for a < b, defined by ``[H_a, H_b] = R^d_{ab} V_d``."""
    gamma = gamma if gamma is not None else connection_coefficients(sode)
    n = sode.n
    out = {}
    for d in range(n):
        for a in range(n):
            for b in range(a + 1, n):
                value = horizontal_derivative(sode, gamma, b, gamma[d][a])
                value -= horizontal_derivative(sode, gamma, a, gamma[d][b])
                out[(d, a, b)] = tidy(value)
    return out


def build_geometry(sode: Sode) -> GeometryData:
    logger.debug("Building geometry for %s (n=%d)", sode.name, sode.n)
    gamma = connection_coefficients(sode)
    phi = jacobi_endomorphism(sode, gamma)
    return GeometryData(sode=sode, gamma=gamma, phi=phi, curvature_upper=curvature(sode, gamma))


# ---------------------------------------------------------------------------
# Frames
# ---------------------------------------------------------------------------

def adapted_frame(geo: GeometryData) -> Frame:
    """Frame ``[Gamma, H_1..H_n, V_1..V_n]`` with coframe ``[dt, theta^a, psi^a]``."""
    s = geo.symbols
    n = geo.n
    gamma = geo.gamma
    zero, one = sympy.Integer(0), sympy.Integer(1)

    def unit(a: int) -> list[sympy.Expr]:
        return [one if b == a else zero for b in range(n)]

    vectors = [[one, *s.velocities, *geo.sode.F]]
    vectors += [[zero, *unit(a), *(-gamma[b][a] for b in range(n))] for a in range(n)]
    vectors += [[zero, *([zero] * n), *unit(a)] for a in range(n)]

    covectors = [[one, *([zero] * (2 * n))]]
    covectors += [[-s.velocity(a), *unit(a), *([zero] * n)] for a in range(n)]
    for a in range(n):
        dt_part = -geo.sode.F[a] - sum((gamma[a][b] * s.velocity(b) for b in range(n)), zero)
        covectors.append([tidy(dt_part), *(gamma[a][b] for b in range(n)), *unit(a)])

    labels = ["Gamma", *(f"H{a + 1}" for a in range(n)), *(f"V{a + 1}" for a in range(n))]
    covector_labels = ["dt", *(f"theta{a + 1}" for a in range(n)), *(f"psi{a + 1}" for a in range(n))]
    return Frame(vectors, covectors, s.jet, labels, covector_labels)


_FIELD = re.compile(r"^(Gamma|H|V)(\d*)$")


def frame_derivative(f: sympy.Expr, which: str, geo: GeometryData) -> sympy.Expr:
    """Derivative of ``f`` along ``Gamma``, ``H<a>`` or ``V<a>`` (1-based a)."""
    match = _FIELD.match(which)
    if not match or (match.group(1) == "Gamma") != (match.group(2) == ""):
        raise ValueError(f"Unknown frame field '{which}'; use Gamma, H<a> or V<a>")
    kind, label = match.groups()
    if kind == "Gamma":
        return geo.frame.apply(0, f)
    a = int(label) - 1
    if not 0 <= a < geo.n:
        raise IndexError(f"Frame index {label} out of range 1..{geo.n}")
    index = geo.h_index(a) if kind == "H" else geo.v_index(a)
    return geo.frame.apply(index, f)


def exterior_derivative_coframe(omega: Form, geo: GeometryData) -> Form:
    """``d omega`` expanded in the adapted coframe."""
    return omega.in_frame(geo.frame).exterior_derivative()
