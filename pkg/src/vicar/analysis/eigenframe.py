"""Eigen-structure of the Jacobi endomorphism and the structure functions.

The eigenforms ``phi^a`` of Phi are copied to the vertical and horizontal
1-forms ``phi^{aV} = phi^a_c psi^c`` and ``phi^{aH} = phi^a_c theta^c``. Their
exterior derivatives, expanded in the eigen-coframe
``{dt, phi^{bV}, phi^{bH}}``, read

    d phi^{aV} = -tauG^a_b dt^phi^{bV} - lambda_a dt^phi^{aH}
                 + tauH^a_{cb} phi^{bV}^phi^{cH} + tauV^a_{cb} phi^{bV}^phi^{cV}
                 - C^a_{bc} phi^{bH}^phi^{cH}  (b < c)
    d phi^{aH} = dt^phi^{aV} - tauG^a_b dt^phi^{bH}
                 + tauH^a_{cb} phi^{bH}^phi^{cH} - tauV^a_{bc} phi^{bV}^phi^{cH}

and every structure function is read off these components. The components
that appear twice are compared and a disagreement raises ExpansionMismatch.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum

import sympy

from vicar.algebra.expr import tidy
from vicar.algebra.printer import to_source
from vicar.algebra.zero import Verdict, ZeroTest, ZeroTester
from vicar.errors import (
    AutoSolveUnavailable,
    EigenVerificationFailed,
    ExpansionMismatch,
    SingularEigenvectorMatrix,
)
from vicar.geometry.forms import Form, Frame
from vicar.geometry.sode import GeometryData

logger = logging.getLogger(__name__)

AUTO_SOLVE_MAX_N = 3


@dataclass
class EigenData:
    """Eigenvalues, eigenvectors ``vectors[a][c] = X_a^c`` and eigenforms ``forms[a][c] = phi^a_c``."""
    eigenvalues: list[sympy.Expr]
    vectors: list[list[sympy.Expr]]
    forms: list[list[sympy.Expr]]
    source: str = "supplied"
    distinct: list[list[Verdict]] = field(default_factory=list)
    diagonalizable: bool = True
    caveats: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def repeated_pairs(self) -> list[tuple[int, int]]:
        return [
            (a, b)
            for a in range(self.n)
            for b in range(a + 1, self.n)
            if self.distinct and self.distinct[a][b] is Verdict.ZERO
        ]

    def has_inconclusive_pair(self) -> bool:
        return any(
            self.distinct[a][b] is Verdict.INCONCLUSIVE
            for a in range(self.n)
            for b in range(a + 1, self.n)
        )


# ---------------------------------------------------------------------------
# Resolving eigendata
# ---------------------------------------------------------------------------

def normalize_unit_first_component(vectors: list[list[sympy.Expr]]) -> list[list[sympy.Expr]]:
    """Rescale each vector so its first structurally non-zero component is 1."""
    out = []
    for vector in vectors:
        pivot = next((c for c in vector if tidy(c) != 0), None)
        if pivot is None:
            out.append(list(vector))
        else:
            out.append([tidy(c / pivot) for c in vector])
    return out


def _auto_solve(geo: GeometryData, tester: ZeroTester) -> tuple[list, list, bool]:
    n = geo.n
    if n > AUTO_SOLVE_MAX_N:
        raise AutoSolveUnavailable(
            f"Automatic eigen-solving is limited to n <= {AUTO_SOLVE_MAX_N}; "
            "supply an 'eigen' block with lambda and vectors"
        )
    phi = sympy.Matrix(geo.phi)
    # roots() takes the generator from the Poly itself
    polynomial = phi.charpoly()
    roots = sympy.roots(polynomial)
    if sum(roots.values()) != n:
        raise AutoSolveUnavailable(
            f"Could not factor the characteristic polynomial {polynomial.as_expr()}; "
            "supply an 'eigen' block with lambda and vectors"
        )

    eigenvalues: list[sympy.Expr] = []
    vectors: list[list[sympy.Expr]] = []
    diagonalizable = True
    for raw in sorted(roots, key=sympy.default_sort_key):
        multiplicity = roots[raw]
        root = tidy(raw)
        if all(value is None for value in tester.values(root)):
            raise AutoSolveUnavailable(f"Eigenvalue {root} is not real on the sampling box")
        basis = (phi - root * sympy.eye(n)).nullspace(iszerofunc=lambda e: tidy(e) == 0)
        if len(basis) < multiplicity:
            diagonalizable = False
        for vector in basis[:multiplicity]:
            eigenvalues.append(root)
            vectors.append([tidy(c) for c in vector])
        logger.debug("Eigenvalue %s with multiplicity %d, %d eigenvectors", root, multiplicity, len(basis))
    return eigenvalues, vectors, diagonalizable


def _distinctness(eigenvalues: list[sympy.Expr], tester: ZeroTester) -> list[list[Verdict]]:
    n = len(eigenvalues)
    matrix = [[Verdict.ZERO] * n for _ in range(n)]
    for a in range(n):
        for b in range(a + 1, n):
            verdict = tester.verdict(tidy(eigenvalues[a] - eigenvalues[b]))
            matrix[a][b] = matrix[b][a] = verdict
    return matrix


def _invert(vectors: list[list[sympy.Expr]], tester: ZeroTester) -> list[list[sympy.Expr]]:
    n = len(vectors)
    columns = sympy.Matrix(n, n, lambda c, a: vectors[a][c])
    det = tidy(columns.det(method="berkowitz"))
    test = tester.test(det)
    values = tester.values(det)
    if test.verdict is Verdict.ZERO or any(v is not None and abs(v) < 1e-12 for v in values):
        raise SingularEigenvectorMatrix(
            f"The eigenvector matrix is singular on the sampling box (det = {to_source(det)})"
        )
    adjugate = columns.adjugate(method="berkowitz")
    return [[tidy(adjugate[a, c] / det) for c in range(n)] for a in range(n)]


def resolve_eigendata(
    geo: GeometryData,
    tester: ZeroTester,
    eigenvalues: list[sympy.Expr] | None = None,
    vectors: list[list[sympy.Expr]] | None = None,
    normalize: str = "none",
    diagonalizable: bool = True,
) -> EigenData:
    """Verify supplied eigendata, or compute it for n <= 3, and invert the eigenvector matrix."""
    n = geo.n
    caveats: list[str] = []
    if eigenvalues is None or vectors is None:
        if not diagonalizable:
            logger.debug("Phi declared non-diagonalizable; no eigendata resolved")
            return EigenData(eigenvalues=[], vectors=[], forms=[], source="supplied", diagonalizable=False)
        eigenvalues, vectors, diagonalizable = _auto_solve(geo, tester)
        source = "auto"
    else:
        if len(eigenvalues) != n or len(vectors) != n or any(len(v) != n for v in vectors):
            raise ValueError(f"Eigendata must provide {n} eigenvalues and {n} vectors of length {n}")
        source = "supplied"
        eigenvalues = [tidy(e) for e in eigenvalues]
        vectors = [[tidy(c) for c in v] for v in vectors]

    if normalize == "unit-first-component":
        vectors = normalize_unit_first_component(vectors)

    if not diagonalizable:
        logger.debug("Phi is not diagonalizable; skipping eigenform inversion")
        return EigenData(
            eigenvalues=list(eigenvalues),
            vectors=[list(v) for v in vectors],
            forms=[],
            source=source,
            distinct=_distinctness(list(eigenvalues), tester),
            diagonalizable=False,
        )

    for a in range(n):
        for c in range(n):
            residual = sum((geo.phi[c][b] * vectors[a][b] for b in range(n)), sympy.Integer(0))
            residual = tidy(residual - eigenvalues[a] * vectors[a][c])
            test = tester.test(residual)
            if test.verdict is Verdict.NONZERO:
                raise EigenVerificationFailed(a + 1, c + 1, to_source(residual))
            if test.verdict is Verdict.INCONCLUSIVE:
                caveats.append(
                    f"eigen equation for X{a + 1}, component {c + 1}, is numerically satisfied only"
                )

    forms = _invert(vectors, tester)
    return EigenData(
        eigenvalues=list(eigenvalues),
        vectors=[list(v) for v in vectors],
        forms=forms,
        source=source,
        distinct=_distinctness(list(eigenvalues), tester),
        diagonalizable=True,
        caveats=caveats,
    )


# ---------------------------------------------------------------------------
# Eigen frame
# ---------------------------------------------------------------------------

def v_index(n: int, b: int) -> int:
    return 1 + b


def h_index(n: int, b: int) -> int:
    return 1 + n + b


def eigen_frame(geo: GeometryData, eig: EigenData) -> Frame:
    """Frame ``[Gamma, X_b^V, X_b^H]`` with coframe ``[dt, phi^{aV}, phi^{aH}]``."""
    n = geo.n
    adapted = geo.frame
    zero = sympy.Integer(0)

    def combine(weights, fields) -> list[sympy.Expr]:
        return [
            tidy(sum((w * f[k] for w, f in zip(weights, fields)), zero))
            for k in range(adapted.dim)
        ]

    h_fields = [adapted.vectors[geo.h_index(c)] for c in range(n)]
    v_fields = [adapted.vectors[geo.v_index(c)] for c in range(n)]
    theta = [adapted.covectors[geo.h_index(c)] for c in range(n)]
    psi = [adapted.covectors[geo.v_index(c)] for c in range(n)]

    vectors = [list(adapted.vectors[0])]
    vectors += [combine(eig.vectors[b], v_fields) for b in range(n)]
    vectors += [combine(eig.vectors[b], h_fields) for b in range(n)]
    covectors = [list(adapted.covectors[0])]
    covectors += [combine(eig.forms[a], psi) for a in range(n)]
    covectors += [combine(eig.forms[a], theta) for a in range(n)]

    labels = ["Gamma", *(f"X{b + 1}V" for b in range(n)), *(f"X{b + 1}H" for b in range(n))]
    covector_labels = ["dt", *(f"phi{a + 1}V" for a in range(n)), *(f"phi{a + 1}H" for a in range(n))]
    return Frame(vectors, covectors, adapted.coordinates, labels, covector_labels)


# ---------------------------------------------------------------------------
# Structure functions
# ---------------------------------------------------------------------------

@dataclass
class StructureFunctions:
    """Structure functions with 0-based indices.

    ``tau_gamma[a][b]`` is tauG^a_b, ``tau_v[a][b][c]`` is tauV^a_{bc},
    ``tau_h[a][b][c]`` is tauH^a_{bc} and ``curv[a][b][c]`` is
    ``C^a_{bc} = phi^{aV}(R(X_b^H, X_c^H))``.
    """
    n: int
    eigenvalues: list[sympy.Expr]
    frame: Frame
    tau_gamma: list[list[sympy.Expr]]
    tau_v: list[list[list[sympy.Expr]]]
    tau_h: list[list[list[sympy.Expr]]]
    curv: list[list[list[sympy.Expr]]]
    dphi_v: list[Form]
    dphi_h: list[Form]
    consistency: list[tuple[str, ZeroTest]] = field(default_factory=list)

    def t(self) -> int:
        return 0

    def v(self, b: int) -> int:
        return v_index(self.n, b)

    def h(self, b: int) -> int:
        return h_index(self.n, b)

    def a_v(self, a: int, b: int, c: int) -> sympy.Expr:
        """``A^{aV}_{bc} = tauV^a_{bc} - 2 tauV^a_{cb}``."""
        return tidy(self.tau_v[a][b][c] - 2 * self.tau_v[a][c][b])

    def a_h(self, a: int, b: int, c: int) -> sympy.Expr:
        return tidy(self.tau_h[a][b][c] - 2 * self.tau_h[a][c][b])

    def omega(self, a: int) -> Form:
        """``omega^a = phi^{aV} ^ phi^{aH}``."""
        return Form(self.frame, 2, {(self.v(a), self.h(a)): sympy.Integer(1)})

    def xi_diag(self, a: int) -> Form:
        """``xi^a_a = -2 tauG^a_a dt + sum_{b != a} (A^{aV}_{ab} phi^{bV} + A^{aH}_{ab} phi^{bH})``."""
        terms = [(-2 * self.tau_gamma[a][a], self.t())]
        for b in range(self.n):
            if b != a:
                terms.append((self.a_v(a, a, b), self.v(b)))
                terms.append((self.a_h(a, a, b), self.h(b)))
        return Form.combination(self.frame, terms).tidied()

    def xi_off(self, a: int, b: int) -> Form:
        """``xi^a_b = tauV^a_{bb} phi^{aV} + tauH^a_{bb} phi^{aH}`` for b != a."""
        return Form.combination(
            self.frame,
            [(self.tau_v[a][b][b], self.v(a)), (self.tau_h[a][b][b], self.h(a))],
        ).tidied()

    def entries(self) -> list[tuple[str, sympy.Expr]]:
        """Every structure function with a 1-based name, in a fixed order."""
        n = self.n
        out = []
        for a in range(n):
            for b in range(n):
                out.append((f"tauGamma[{a + 1}][{b + 1}]", self.tau_gamma[a][b]))
        for name, table in (("tauV", self.tau_v), ("tauH", self.tau_h)):
            for a in range(n):
                for b in range(n):
                    for c in range(n):
                        out.append((f"{name}[{a + 1}][{b + 1}][{c + 1}]", table[a][b][c]))
        for a in range(n):
            for b in range(n):
                for c in range(b + 1, n):
                    out.append((f"C[{a + 1}][{b + 1}][{c + 1}]", self.curv[a][b][c]))
        return out

    def lookup(self, name: str) -> sympy.Expr:
        return dict(self.entries())[name]


def _nested(n: int, depth: int):
    if depth == 1:
        return [sympy.Integer(0)] * n
    return [_nested(n, depth - 1) for _ in range(n)]


def structure_functions(
    geo: GeometryData,
    eig: EigenData,
    tester: ZeroTester,
    check: bool = True,
) -> StructureFunctions:
    """Expand ``d phi^{aV}``, ``d phi^{aH}`` in the eigen-coframe and read off tau and C."""
    n = geo.n
    adapted = geo.frame
    frame = eigen_frame(geo, eig)
    T = 0
    V = lambda b: v_index(n, b)  # noqa: E731
    H = lambda b: h_index(n, b)  # noqa: E731

    dphi_v: list[Form] = []
    dphi_h: list[Form] = []
    for a in range(n):
        vertical = Form(adapted, 1, {(geo.v_index(c),): eig.forms[a][c] for c in range(n)})
        horizontal = Form(adapted, 1, {(geo.h_index(c),): eig.forms[a][c] for c in range(n)})
        dphi_v.append(vertical.exterior_derivative().in_frame(frame))
        dphi_h.append(horizontal.exterior_derivative().in_frame(frame))
        logger.debug("Expanded d(phi^%dV) and d(phi^%dH) in the eigen-coframe", a + 1, a + 1)

    tau_gamma = _nested(n, 2)
    tau_v = _nested(n, 3)
    tau_h = _nested(n, 3)
    curv = _nested(n, 3)
    for a in range(n):
        for b in range(n):
            tau_gamma[a][b] = tidy(-dphi_v[a].component(T, V(b)))
            for c in range(n):
                tau_h[a][c][b] = tidy(dphi_v[a].component(V(b), H(c)))
                tau_v[a][b][c] = tidy(-dphi_h[a].component(V(b), H(c)))
                curv[a][b][c] = tidy(-dphi_v[a].component(H(b), H(c)))

    sf = StructureFunctions(
        n=n,
        eigenvalues=list(eig.eigenvalues),
        frame=frame,
        tau_gamma=tau_gamma,
        tau_v=tau_v,
        tau_h=tau_h,
        curv=curv,
        dphi_v=dphi_v,
        dphi_h=dphi_h,
    )
    if check:
        _cross_check(sf, geo, eig, tester)
    return sf


def _cross_check(sf: StructureFunctions, geo: GeometryData, eig: EigenData, tester: ZeroTester):
    n = sf.n
    T, V, H = sf.t(), sf.v, sf.h
    residuals: list[tuple[str, sympy.Expr]] = []
    for a in range(n):
        dv, dh = sf.dphi_v[a], sf.dphi_h[a]
        for b in range(n):
            delta = int(a == b)
            residuals.append((f"d(phi{a + 1}V)(Gamma, X{b + 1}H) + lambda{a + 1} delta",
                              dv.component(T, H(b)) + eig.eigenvalues[a] * delta))
            residuals.append((f"d(phi{a + 1}H)(Gamma, X{b + 1}V) - delta",
                              dh.component(T, V(b)) - delta))
            residuals.append((f"d(phi{a + 1}H)(Gamma, X{b + 1}H) + tauGamma[{a + 1}][{b + 1}]",
                              dh.component(T, H(b)) + sf.tau_gamma[a][b]))
            for c in range(b + 1, n):
                residuals.append((f"d(phi{a + 1}V)(X{b + 1}V, X{c + 1}V)",
                                  dv.component(V(b), V(c)) - (sf.tau_v[a][c][b] - sf.tau_v[a][b][c])))
                residuals.append((f"d(phi{a + 1}H)(X{b + 1}H, X{c + 1}H)",
                                  dh.component(H(b), H(c)) - (sf.tau_h[a][c][b] - sf.tau_h[a][b][c])))
                residuals.append((f"d(phi{a + 1}H)(X{b + 1}V, X{c + 1}V)", dh.component(V(b), V(c))))
                via_curvature = sum(
                    (
                        eig.forms[a][f] * geo.R(f, d, e) * eig.vectors[b][d] * eig.vectors[c][e]
                        for f in range(n)
                        for d in range(n)
                        for e in range(n)
                    ),
                    sympy.Integer(0),
                )
                residuals.append((f"C[{a + 1}][{b + 1}][{c + 1}] via curvature tensor",
                                  via_curvature - sf.curv[a][b][c]))

    for description, residual in residuals:
        residual = tidy(residual)
        test = tester.test(residual)
        sf.consistency.append((description, test))
        if test.verdict is Verdict.NONZERO:
            raise ExpansionMismatch(
                f"Expansion check failed for {description}: residual {to_source(residual)}"
            )


# ---------------------------------------------------------------------------
# Integrability and reconstruction
# ---------------------------------------------------------------------------

class Integrability(str, Enum):
    INTEGRABLE = "Integrable"
    NON_INTEGRABLE = "NonIntegrable"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class IntegrabilityResult:
    label: int
    verdict: Integrability
    witnesses: list[tuple[str, sympy.Expr]] = field(default_factory=list)


def integrability_test(sf: StructureFunctions, a: int, tester: ZeroTester) -> IntegrabilityResult:
    """Frobenius test of ``Sp{phi^{aV}, phi^{aH}}``.

    Looks at tauG^a_b, tauV^a_{bc}, tauH^a_{bc} and C^a_{bc} for b, c != a.
    """
    others = [b for b in range(sf.n) if b != a]
    candidates: list[tuple[str, sympy.Expr]] = []
    candidates += [(f"tauGamma[{a + 1}][{b + 1}]", sf.tau_gamma[a][b]) for b in others]
    for name, table in (("tauV", sf.tau_v), ("tauH", sf.tau_h)):
        candidates += [
            (f"{name}[{a + 1}][{b + 1}][{c + 1}]", table[a][b][c]) for b in others for c in others
        ]
    candidates += [
        (f"C[{a + 1}][{b + 1}][{c + 1}]", sf.curv[a][b][c]) for b in others for c in others if b < c
    ]

    witnesses = []
    inconclusive = False
    for name, value in candidates:
        verdict = tester.verdict(value)
        if verdict is Verdict.NONZERO:
            witnesses.append((name, value))
        elif verdict is Verdict.INCONCLUSIVE:
            inconclusive = True
    if witnesses:
        return IntegrabilityResult(a + 1, Integrability.NON_INTEGRABLE, witnesses)
    if inconclusive:
        return IntegrabilityResult(a + 1, Integrability.INCONCLUSIVE)
    return IntegrabilityResult(a + 1, Integrability.INTEGRABLE)


def reconstruct_differentials(sf: StructureFunctions) -> tuple[list[Form], list[Form]]:
    """Rebuild ``d phi^{aV}`` and ``d phi^{aH}`` from lambda, tau and C."""
    n = sf.n
    T, V, H = sf.t(), sf.v, sf.h
    dv_all, dh_all = [], []
    for a in range(n):
        dv: dict[tuple[int, ...], sympy.Expr] = {}
        dh: dict[tuple[int, ...], sympy.Expr] = {}

        def add(target, key, value):
            # the Form constructor sorts keys; pre-sum under the raw key order
            target[key] = target.get(key, sympy.Integer(0)) + value

        add(dv, (T, H(a)), -sf.eigenvalues[a])
        add(dh, (T, V(a)), sympy.Integer(1))
        for b in range(n):
            add(dv, (T, V(b)), -sf.tau_gamma[a][b])
            add(dh, (T, H(b)), -sf.tau_gamma[a][b])
            for c in range(n):
                add(dv, (V(b), H(c)), sf.tau_h[a][c][b])
                add(dh, (V(b), H(c)), -sf.tau_v[a][b][c])
                if b != c:
                    add(dv, (V(b), V(c)), sf.tau_v[a][c][b])
                    add(dh, (H(b), H(c)), sf.tau_h[a][c][b])
                if b < c:
                    add(dv, (H(b), H(c)), -sf.curv[a][b][c])
        dv_all.append(Form(sf.frame, 2, dv).tidied())
        dh_all.append(Form(sf.frame, 2, dh).tidied())
    return dv_all, dh_all
