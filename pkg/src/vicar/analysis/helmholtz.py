"""Helmholtz conditions, Cartan 2-forms and Pfaffian candidates.

A multiplier ``g_ab`` makes ``g_ab (xddot^b - F^b)`` Euler-Lagrange iff

    g_ab = g_ba,  Gamma(g_ab) = g_ac Gamma^c_b + g_bc Gamma^c_a,
    g_ac Phi^c_b = g_bc Phi^c_a,  dg_ab/du^c = dg_ac/du^b,

with det g != 0. Equivalently ``Omega = g_ab psi^a ^ theta^b`` is closed and
of maximal rank.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
import sympy

from vicar.algebra.expr import call_numeric, compile_numeric, tidy
from vicar.algebra.zero import Verdict, ZeroTester, combine
from vicar.analysis.classify import BniiData
from vicar.analysis.eigenframe import EigenData, h_index, v_index
from vicar.errors import DomainEvaluationError
from vicar.geometry.forms import Form, Frame
from vicar.geometry.sode import GeometryData, total_derivative

logger = logging.getLogger(__name__)

SYMBOLIC_DET_MAX_N = 3

DISPLAYED_TYPES = ("GVV", "GHV", "GHH", "HVV")
DERIVED_TYPES = ("HHV", "HHH")


class Multiplier:
    """Symmetric n x n matrix stored as its upper triangle."""

    def __init__(self, n: int, upper: dict[tuple[int, int], sympy.Expr]):
        self.n = n
        self._upper = {key: tidy(value) for key, value in upper.items()}

    @classmethod
    def from_rows(cls, rows: list[list[sympy.Expr]]) -> Multiplier:
        n = len(rows)
        if any(len(row) != n for row in rows):
            raise ValueError("A multiplier must be a square matrix")
        for a in range(n):
            for b in range(a + 1, n):
                difference = tidy(sympy.sympify(rows[a][b]) - sympy.sympify(rows[b][a]))
                if difference != 0 and sympy.simplify(difference) != 0:
                    raise ValueError(f"Multiplier is not symmetric at ({a + 1}, {b + 1})")
        return cls(n, {(a, b): sympy.sympify(rows[a][b]) for a in range(n) for b in range(a, n)})

    def __getitem__(self, key: tuple[int, int]) -> sympy.Expr:
        a, b = key
        return self._upper.get((min(a, b), max(a, b)), sympy.Integer(0))

    def rows(self) -> list[list[sympy.Expr]]:
        return [[self[a, b] for b in range(self.n)] for a in range(self.n)]

    def scaled(self, factor: sympy.Expr) -> Multiplier:
        return Multiplier(self.n, {key: factor * value for key, value in self._upper.items()})

    def determinant(self) -> sympy.Expr:
        return tidy(sympy.Matrix(self.rows()).det(method="berkowitz"))


@dataclass
class CartanCandidate:
    """Coefficients ``r_ab`` of ``Omega = r_ab phi^{aV} ^ phi^{bH}``; a diagonal candidate has r_aa only."""
    r: list[list[sympy.Expr]]

    @classmethod
    def diagonal(cls, values: list[sympy.Expr]) -> CartanCandidate:
        n = len(values)
        zero = sympy.Integer(0)
        return cls([[sympy.sympify(values[a]) if a == b else zero for b in range(n)] for a in range(n)])

    @property
    def n(self) -> int:
        return len(self.r)

    def two_form(self, frame: Frame) -> Form:
        """The 2-form in an eigen frame built by ``eigen_frame``."""
        n = self.n
        components = {}
        for a in range(n):
            for b in range(n):
                if self.r[a][b] != 0:
                    components[(v_index(n, a), h_index(n, b))] = self.r[a][b]
        return Form(frame, 2, components)


@dataclass
class ConditionResidual:
    name: str
    verdict: Verdict
    residual: sympy.Expr


@dataclass
class HelmholtzResult:
    conditions: list[ConditionResidual] = field(default_factory=list)
    det_verdict: Verdict = Verdict.INCONCLUSIVE
    det: sympy.Expr | None = None

    @property
    def verdict(self) -> Verdict:
        """Zero when every condition vanishes and the determinant does not."""
        conditions = combine(c.verdict for c in self.conditions)
        if conditions is Verdict.NONZERO or self.det_verdict is Verdict.ZERO:
            return Verdict.NONZERO
        if conditions is Verdict.INCONCLUSIVE or self.det_verdict is Verdict.INCONCLUSIVE:
            return Verdict.INCONCLUSIVE
        return Verdict.ZERO

    @property
    def passed(self) -> bool:
        return self.verdict is Verdict.ZERO

    def failing(self) -> list[ConditionResidual]:
        return [c for c in self.conditions if c.verdict is Verdict.NONZERO]


@dataclass
class ClosedFormResult:
    components: dict[str, list[tuple[tuple[int, ...], Verdict, sympy.Expr]]] = field(default_factory=dict)
    closed: Verdict = Verdict.INCONCLUSIVE
    rank: int = 0
    maximal_rank: bool = False
    derivability: Verdict | None = None

    def group_verdict(self, kind: str) -> Verdict:
        return combine(v for _, v, _ in self.components.get(kind, []))

    @property
    def displayed(self) -> Verdict:
        return combine(self.group_verdict(k) for k in DISPLAYED_TYPES)

    @property
    def derived(self) -> Verdict:
        return combine(self.group_verdict(k) for k in DERIVED_TYPES)

    @property
    def passed(self) -> bool:
        return self.closed is Verdict.ZERO and self.maximal_rank


@dataclass
class PfaffianResult:
    sigma1: Verdict
    sigma1_residual: Form
    alphas: list[tuple[int, Verdict, sympy.Expr, sympy.Expr]] = field(default_factory=list)

    @property
    def verdict(self) -> Verdict:
        return combine([self.sigma1, *(v for _, v, _, _ in self.alphas)])


# ---------------------------------------------------------------------------
# Sarlet conditions
# ---------------------------------------------------------------------------

def _record(tester: ZeroTester, name: str, residual: sympy.Expr) -> ConditionResidual:
    residual = tidy(residual)
    return ConditionResidual(name, tester.verdict(residual), residual)


def numeric_determinant_verdict(g: Multiplier, tester: ZeroTester, tol: float = 1e-9) -> Verdict:
    flat = [entry for row in g.rows() for entry in row]
    function = compile_numeric(flat, tester.symbols)
    seen = False
    for point in tester.points:
        try:
            values = call_numeric(function, [point[s] for s in tester.symbols])
        except DomainEvaluationError:
            continue
        matrix = np.array(values, dtype=float).reshape(g.n, g.n)
        scale = max(1.0, float(np.abs(matrix).max())) ** g.n
        if abs(np.linalg.det(matrix)) > tol * scale:
            return Verdict.NONZERO
        seen = True
    return Verdict.ZERO if seen else Verdict.INCONCLUSIVE


def check_helmholtz(g: Multiplier, geo: GeometryData, tester: ZeroTester) -> HelmholtzResult:
    """Gamma, Phi and velocity conditions plus det g; symmetry holds by construction of ``g``."""
    n = geo.n
    if g.n != n:
        raise ValueError(f"Multiplier is {g.n}x{g.n} but the system has n = {n}")
    gamma, phi = geo.gamma, geo.phi
    u = geo.symbols.velocities
    zero = sympy.Integer(0)
    result = HelmholtzResult()
    conditions = result.conditions

    for a in range(n):
        for b in range(a, n):
            residual = total_derivative(geo.sode, g[a, b])
            residual -= sum((g[a, c] * gamma[c][b] + g[b, c] * gamma[c][a] for c in range(n)), zero)
            conditions.append(_record(tester, f"gamma[{a + 1}][{b + 1}]", residual))
    for a in range(n):
        for b in range(a + 1, n):
            residual = sum((g[a, c] * phi[c][b] - g[b, c] * phi[c][a] for c in range(n)), zero)
            conditions.append(_record(tester, f"phi[{a + 1}][{b + 1}]", residual))
    for a in range(n):
        for b in range(n):
            for c in range(b + 1, n):
                residual = sympy.diff(g[a, b], u[c]) - sympy.diff(g[a, c], u[b])
                conditions.append(_record(tester, f"velocity[{a + 1}][{b + 1}][{c + 1}]", residual))

    if n <= SYMBOLIC_DET_MAX_N:
        result.det = g.determinant()
        result.det_verdict = tester.verdict(result.det)
    else:
        result.det_verdict = numeric_determinant_verdict(g, tester)
    logger.debug("Helmholtz check: %s, det %s", combine(c.verdict for c in conditions).value,
                 result.det_verdict.value)
    return result


def r_to_g(candidate: CartanCandidate, eig: EigenData) -> Multiplier:
    """``g_cd = r_ab phi^a_c phi^b_d``, symmetrised."""
    n = candidate.n
    phi = eig.forms
    zero = sympy.Integer(0)
    upper = {}
    for c in range(n):
        for d in range(c, n):
            value = sum(
                (
                    (candidate.r[a][b] + candidate.r[b][a]) / 2 * phi[a][c] * phi[b][d]
                    for a in range(n)
                    for b in range(n)
                ),
                zero,
            )
            upper[(c, d)] = value
    return Multiplier(n, upper)


def multiplier_two_form(g: Multiplier, geo: GeometryData) -> Form:
    """``Omega = g_ab psi^a ^ theta^b`` in the adapted coframe."""
    n = geo.n
    components = {
        (geo.v_index(a), geo.h_index(b)): g[a, b] for a in range(n) for b in range(n) if g[a, b] != 0
    }
    return Form(geo.frame, 2, components)


# ---------------------------------------------------------------------------
# Closed 2-form route
# ---------------------------------------------------------------------------

def _component_type(geo: GeometryData, key: tuple[int, ...]) -> str:
    kinds = []
    for index in key:
        if index == geo.gamma_index():
            kinds.append("G")
        elif index <= geo.n:
            kinds.append("H")
        else:
            kinds.append("V")
    return "".join(sorted(kinds, key="GHV".index))


def check_closed_form(omega: Form, geo: GeometryData, tester: ZeroTester) -> ClosedFormResult:
    """Zero-test every component of ``d Omega`` in the adapted frame and the rank of ``Omega``."""
    adapted = omega.in_frame(geo.frame)
    d_omega = adapted.exterior_derivative()
    result = ClosedFormResult()
    for key, value in d_omega.items():
        kind = _component_type(geo, key)
        result.components.setdefault(kind, []).append((key, tester.verdict(tidy(value)), value))
    result.closed = combine(
        verdict for entries in result.components.values() for _, verdict, _ in entries
    )

    if result.displayed is Verdict.ZERO:
        result.derivability = result.derived

    dim = geo.frame.dim
    matrix = [[adapted.component(r, c) for c in range(dim)] for r in range(dim)]
    result.rank = tester.generic_rank(matrix)
    result.maximal_rank = result.rank == 2 * geo.n
    logger.debug("d Omega closed: %s, rank %d", result.closed.value, result.rank)
    return result


# ---------------------------------------------------------------------------
# Pfaffian candidates
# ---------------------------------------------------------------------------

def verify_pfaffian_solution(
    r1_tilde: sympy.Expr,
    r_alpha: dict[int, sympy.Expr],
    bnii: BniiData,
    tester: ZeroTester,
) -> PfaffianResult:
    """Substitute candidates into the Pfaffian system of the rank-1 subcase.

    ``r_alpha`` is keyed by 0-based index of an integrable co-distribution.
    P_alpha and Q_alpha are read off as minus the residual on phi^{alphaV}
    and phi^{alphaH}.
    """
    sf = bnii.sf
    frame = sf.frame
    sigma1 = Form.differential(frame, r1_tilde) + bnii.xi_tilde(bnii.i).scale(r1_tilde)
    sigma1_verdict = combine(tester.verdict(tidy(v)) for _, v in sigma1.items())
    result = PfaffianResult(sigma1=sigma1_verdict, sigma1_residual=sigma1)

    for al in bnii.alphas:
        if al not in r_alpha:
            continue
        r = r_alpha[al]
        sigma = Form.differential(frame, r) + bnii.xi_tilde(al).scale(r1_tilde) + sf.xi_diag(al).scale(r)
        rest = sigma.without([sf.v(al), sf.h(al)])
        verdict = combine(tester.verdict(tidy(v)) for _, v in rest.items())
        p = tidy(-sigma.component(sf.v(al)))
        q = tidy(-sigma.component(sf.h(al)))
        result.alphas.append((al, verdict, p, q))
    return result
