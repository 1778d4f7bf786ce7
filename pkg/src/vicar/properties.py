"""Property suites run next to the golden corpus.

Each check returns a ``PropertyResult``; none of them needs reference
values, so they also cover systems with n > 3 where no worked example
exists.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import sympy

from vicar.algebra.expr import call_numeric, compile_numeric, differentiate, finite_difference, tidy
from vicar.algebra.parser import parse
from vicar.algebra.printer import to_source
from vicar.algebra.zero import Verdict, ZeroTester
from vicar.analysis.classify import cartan_generality, general_step1_rows, sigma1_membership
from vicar.analysis.eigenframe import (
    EigenData,
    StructureFunctions,
    eigen_frame,
    reconstruct_differentials,
)
from vicar.analysis.helmholtz import (
    CartanCandidate,
    Multiplier,
    check_closed_form,
    check_helmholtz,
    multiplier_two_form,
    r_to_g,
)
from vicar.errors import DomainEvaluationError
from vicar.geometry.forms import Form
from vicar.geometry.sode import GeometryData

logger = logging.getLogger(__name__)

DD_TOLERANCE = 1e-7
FD_POINTS = 10
RESCALE_FACTOR = sympy.Integer(3)


@dataclass
class PropertyResult:
    name: str
    passed: bool
    detail: str = ""


def _normalized_residual(expr: sympy.Expr, tester: ZeroTester) -> float | None:
    """Largest ``|sum| / (1 + max |term|)`` over the sample points (None if nowhere defined)."""
    terms = sympy.Add.make_args(sympy.sympify(expr))
    function = compile_numeric(terms, tester.symbols)
    worst = None
    for point in tester.points:
        try:
            values = call_numeric(function, [point[s] for s in tester.symbols])
        except DomainEvaluationError:
            continue
        scale = 1.0 + max(abs(v) for v in values)
        residual = abs(math.fsum(values)) / scale
        worst = residual if worst is None else max(worst, residual)
    return worst


# ---------------------------------------------------------------------------
# Frame calculus
# ---------------------------------------------------------------------------

def coframe_forms(geo: GeometryData, eig: EigenData | None = None) -> list[tuple[str, Form]]:
    """The adapted coframe plus phi^{aV} and phi^{aH} when eigendata exist, in the adapted frame."""
    frame = geo.frame
    forms = [(label, Form.coframe(frame, i)) for i, label in enumerate(frame.covector_labels)]
    if eig is not None and eig.forms:
        n = geo.n
        for a in range(n):
            row = eig.forms[a]
            components = {(geo.v_index(c),): row[c] for c in range(n)}
            forms.append((f"phi{a + 1}V", Form(frame, 1, components)))
            components = {(geo.h_index(c),): row[c] for c in range(n)}
            forms.append((f"phi{a + 1}H", Form(frame, 1, components)))
    return forms


def check_dd_zero(
    geo: GeometryData, tester: ZeroTester, eig: EigenData | None = None
) -> PropertyResult:
    """``d(d e) = 0`` for every coframe 1-form, to DD_TOLERANCE at the sample points."""
    worst = 0.0
    offender = ""
    for label, form in coframe_forms(geo, eig):
        dd = form.exterior_derivative().exterior_derivative()
        for key, value in dd.items():
            residual = _normalized_residual(value, tester)
            if residual is not None and residual > worst:
                worst = residual
                offender = f"d(d {label}) component {key}"
    passed = worst <= DD_TOLERANCE
    detail = f"max residual {worst:.2e}" + ("" if passed else f" at {offender}")
    return PropertyResult("dd-zero", passed, detail)


def check_commutators(geo: GeometryData, tester: ZeroTester) -> PropertyResult:
    """``[Gamma, V_a] = -H_a + Gamma^b_a V_b`` and ``[H_a, H_b] = R^d_{ab} V_d``.

    Both sides are applied to every coordinate function.
    """
    frame = geo.frame
    n = geo.n
    G = geo.gamma_index()
    failures = []
    for f in geo.symbols.jet:
        for a in range(n):
            V, H = geo.v_index(a), geo.h_index(a)
            lhs = frame.apply(G, frame.apply(V, f)) - frame.apply(V, frame.apply(G, f))
            rhs = -frame.apply(H, f) + sum(
                (geo.gamma[b][a] * frame.apply(geo.v_index(b), f) for b in range(n)), sympy.Integer(0)
            )
            if tester.verdict(tidy(lhs - rhs)) is not Verdict.ZERO:
                failures.append(f"[Gamma, V{a + 1}]({f})")
            for b in range(a + 1, n):
                Hb = geo.h_index(b)
                lhs = frame.apply(H, frame.apply(Hb, f)) - frame.apply(Hb, frame.apply(H, f))
                rhs = sum(
                    (geo.R(d, a, b) * frame.apply(geo.v_index(d), f) for d in range(n)),
                    sympy.Integer(0),
                )
                if tester.verdict(tidy(lhs - rhs)) is not Verdict.ZERO:
                    failures.append(f"[H{a + 1}, H{b + 1}]({f})")
    return PropertyResult("commutators", not failures, ", ".join(failures[:3]))


def check_duality(geo: GeometryData, eig: EigenData | None, tester: ZeroTester) -> PropertyResult:
    frames = [("adapted", geo.frame)]
    if eig is not None and eig.forms:
        frames.append(("eigen", eigen_frame(geo, eig)))
    failures = []
    for name, frame in frames:
        for i, j, value in frame.duality_defects():
            if tester.verdict(value) is not Verdict.ZERO:
                failures.append(f"{name} e^{i}(E_{j})")
    return PropertyResult("duality", not failures, ", ".join(failures[:3]))


def check_finite_differences(
    geo: GeometryData,
    tester: ZeroTester,
    step: float = 1e-6,
    tolerance: float = 1e-5,
) -> PropertyResult:
    """Symbolic derivatives of F^a and Gamma^a_b against central differences."""
    symbols = geo.symbols.jet
    targets = [(f"F{a + 1}", F) for a, F in enumerate(geo.sode.F)]
    targets += [
        (f"Gamma[{a + 1}][{b + 1}]", geo.gamma[a][b]) for a in range(geo.n) for b in range(geo.n)
    ]
    checked = 0
    worst = 0.0
    for label, expr in targets:
        for s in symbols:
            exact = differentiate(expr, s)
            for point in tester.points[:FD_POINTS]:
                try:
                    values = [point[x] for x in symbols]
                    expected = call_numeric(compile_numeric([exact], symbols), values)[0]
                    approx = finite_difference(expr, s, {x: point[x] for x in symbols}, step)
                except DomainEvaluationError:
                    continue
                checked += 1
                error = abs(expected - approx) / (1.0 + abs(expected))
                if error > worst:
                    worst = error
                if error > tolerance:
                    return PropertyResult(
                        "finite-differences", False, f"d{label}/d{s.name}: relative error {error:.2e}"
                    )
    return PropertyResult("finite-differences", True, f"{checked} evaluations, max error {worst:.2e}")


def check_roundtrip(
    geo: GeometryData, tester: ZeroTester, eig: EigenData | None = None
) -> PropertyResult:
    """``parse(to_source(e))`` is structurally equal to ``e`` for F, Phi and the eigenvalues."""
    exprs = [*geo.sode.F, *(entry for row in geo.phi for entry in row)]
    if eig is not None:
        exprs += list(eig.eigenvalues)
    for expr in exprs:
        text = to_source(expr)
        back = parse(text, geo.symbols)
        if tidy(back - expr) != 0 and tester.verdict(tidy(back - expr)) is not Verdict.ZERO:
            return PropertyResult("roundtrip", False, f"'{text}' re-parses differently")
    return PropertyResult("roundtrip", True, f"{len(exprs)} expressions")


# ---------------------------------------------------------------------------
# Structure functions
# ---------------------------------------------------------------------------

def check_tau_consistency(sf: StructureFunctions) -> PropertyResult:
    undecided = [description for description, test in sf.consistency if test.verdict is not Verdict.ZERO]
    return PropertyResult(
        "tau-consistency",
        not undecided,
        f"{len(sf.consistency)} checks" if not undecided else f"undecided: {undecided[0]}",
    )


def check_reconstruction(sf: StructureFunctions, tester: ZeroTester) -> PropertyResult:
    """Rebuilding ``d phi`` from lambda, tau and C gives back the expanded differentials."""
    rebuilt_v, rebuilt_h = reconstruct_differentials(sf)
    for a in range(sf.n):
        pairs = (("V", rebuilt_v[a], sf.dphi_v[a]), ("H", rebuilt_h[a], sf.dphi_h[a]))
        for name, rebuilt, original in pairs:
            difference = rebuilt - original
            for key, value in difference.items():
                if tester.verdict(value) is not Verdict.ZERO:
                    return PropertyResult("reconstruction", False, f"d(phi{a + 1}{name}) component {key}")
    return PropertyResult("reconstruction", True)


# ---------------------------------------------------------------------------
# Multipliers
# ---------------------------------------------------------------------------

def _closed_form_verdict(g: Multiplier, geo: GeometryData, tester: ZeroTester):
    closed = check_closed_form(multiplier_two_form(g, geo), geo, tester)
    if closed.passed:
        return Verdict.ZERO, closed
    if closed.closed is Verdict.INCONCLUSIVE:
        return Verdict.INCONCLUSIVE, closed
    return Verdict.NONZERO, closed


def check_equivalence(
    g: Multiplier, geo: GeometryData, tester: ZeroTester, source: str
) -> list[PropertyResult]:
    """The Helmholtz conditions and the closed-form route agree; derivability holds."""
    helmholtz = check_helmholtz(g, geo, tester).verdict
    closed_verdict, closed = _closed_form_verdict(g, geo, tester)
    results = [
        PropertyResult(
            f"equivalence-{source}",
            helmholtz is closed_verdict,
            f"conditions {helmholtz.value}, closed form {closed_verdict.value}",
        )
    ]
    if closed.displayed is Verdict.ZERO:
        passed = closed.derivability is Verdict.ZERO
        detail = f"HHV/HHH {closed.derived.value}"
    else:
        passed, detail = True, "displayed conditions fail; nothing to derive"
    results.append(PropertyResult(f"derivability-{source}", passed, detail))

    rescaled = check_helmholtz(g.scaled(RESCALE_FACTOR), geo, tester).verdict
    results.append(
        PropertyResult(
            f"rescaling-{source}",
            rescaled is helmholtz,
            f"{helmholtz.value} -> {rescaled.value} under g -> {RESCALE_FACTOR} g",
        )
    )
    return results


def check_chain(
    candidate: CartanCandidate, sf: StructureFunctions, tester: ZeroTester
) -> PropertyResult:
    """A diagonal Cartan candidate that passes solves the step-1 system and the curvature rows."""
    r = [candidate.r[a][a] for a in range(candidate.n)]
    verdicts = [
        tester.verdict(tidy(sum((c * r[k] for k, c in enumerate(row)), sympy.Integer(0))))
        for row in general_step1_rows(sf)
    ]
    verdicts.append(sigma1_membership(r, sf, tester))
    failing = sum(1 for v in verdicts if v is not Verdict.ZERO)
    return PropertyResult("chain", failing == 0, f"{len(verdicts)} rows, {failing} not zero")


def check_cartan_characters(sizes: range = range(2, 9)) -> PropertyResult:
    for n in sizes:
        g = cartan_generality(n)
        if g.t != g.s1 + 2 * g.s2 or g.s2 != n - 2:
            return PropertyResult("cartan-characters", False, f"n = {n}: s1={g.s1}, s2={g.s2}, t={g.t}")
    return PropertyResult("cartan-characters", True, f"n = {sizes.start}..{sizes.stop - 1}")


# ---------------------------------------------------------------------------
# Suite
# ---------------------------------------------------------------------------

def property_suite(
    geo: GeometryData,
    tester: ZeroTester,
    eig: EigenData | None = None,
    sf: StructureFunctions | None = None,
    multiplier: list[list[sympy.Expr]] | None = None,
    cartan_r: list[list[sympy.Expr]] | None = None,
    fd_step: float = 1e-6,
    fd_tolerance: float = 1e-5,
) -> list[PropertyResult]:
    """Every property that applies to one analysed problem."""
    eig = eig if eig is not None and eig.forms else None
    results = [
        check_dd_zero(geo, tester, eig),
        check_commutators(geo, tester),
        check_duality(geo, eig, tester),
        check_finite_differences(geo, tester, fd_step, fd_tolerance),
        check_roundtrip(geo, tester, eig),
    ]
    if sf is not None:
        results.append(check_tau_consistency(sf))
        results.append(check_reconstruction(sf, tester))
    if multiplier is not None:
        results.extend(check_equivalence(Multiplier.from_rows(multiplier), geo, tester, "multiplier"))
    if cartan_r is not None and eig is not None:
        candidate = CartanCandidate(cartan_r)
        g = r_to_g(candidate, eig)
        results.extend(check_equivalence(g, geo, tester, "cartan"))
        size = len(cartan_r)
        is_diagonal = all(cartan_r[a][b] == 0 for a in range(size) for b in range(size) if a != b)
        if sf is not None and is_diagonal and check_helmholtz(g, geo, tester).passed:
            results.append(check_chain(candidate, sf, tester))
    for result in results:
        logger.debug("Property %s: %s %s", result.name, "pass" if result.passed else "FAIL", result.detail)
    return results
