"""EDS classification of a SODE by the eigen-structure of its Jacobi endomorphism.

The pipeline decides Case A (Phi a multiple of the identity), detects the
repeated-eigenvalue and non-diagonalizable cases, and for distinct
eigenvalues counts the non-integrable eigen co-distributions. With exactly
two of them the step-1 system in (r_1, r_2) is solved by rank, and the
rank-1 subcase is carried through the step-2 differential-ideal and torsion
conditions to a Variational / NotVariational verdict.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations, permutations
from typing import Literal

import sympy

from vicar.algebra.expr import tidy
from vicar.algebra.printer import to_source
from vicar.algebra.zero import Verdict, ZeroTester, combine
from vicar.analysis.eigenframe import (
    EigenData,
    Integrability,
    IntegrabilityResult,
    StructureFunctions,
    integrability_test,
    resolve_eigendata,
    structure_functions,
)
from vicar.geometry.forms import Form
from vicar.geometry.sode import GeometryData

logger = logging.getLogger(__name__)

CaseLabel = str

# Recorded for the report; they never decide a verdict.
INFORMATIONAL_CONDITIONS = ("C-A", "C-DI1")


class ClassificationVerdict(str, Enum):
    VARIATIONAL = "Variational"
    NOT_VARIATIONAL = "NotVariational"
    OUT_OF_SCOPE = "OutOfScope"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class ConditionRecord:
    """One entry of the condition ledger."""
    id: str
    tag: str
    verdict: Verdict
    witness: sympy.Expr | None = None
    detail: str = ""


@dataclass
class Generality:
    s1: int
    s2: int
    t: int
    text: str


@dataclass
class TwoFormModule:
    """A labelled basis of 2-forms in the eigen-coframe at one step of the chain."""
    step: int
    basis: list[tuple[str, Form]] = field(default_factory=list)

    @property
    def labels(self) -> list[str]:
        return [label for label, _ in self.basis]

    def is_independent(self, tester: ZeroTester) -> bool:
        if not self.basis:
            return True
        keys = sorted({key for _, form in self.basis for key in form.components})
        rows = [[form.component(*key) for key in keys] for _, form in self.basis]
        return tester.generic_rank(rows) == len(self.basis)


@dataclass
class DegeneracyResult:
    verdict: Literal["Regular", "NonRegular", "Inconclusive"]
    missing: list[int] = field(default_factory=list)
    rank: int = 0
    maximal_rank: bool = False


@dataclass
class BniiData:
    """Step-2 data of the rank-1 subcase, with the two non-integrable indices first in ``order``."""
    sf: StructureFunctions
    order: list[int]
    h2: sympy.Expr

    @property
    def i(self) -> int:
        return self.order[0]

    @property
    def j(self) -> int:
        return self.order[1]

    @property
    def alphas(self) -> list[int]:
        return self.order[2:]

    def xi_tilde(self, c: int) -> Form:
        """``xi~1_c = xi^1_c + h2 xi^2_c`` in the relabelled indices."""
        return _xi(self.sf, self.i, c) + _xi(self.sf, self.j, c).scale(self.h2)


@dataclass
class ClassificationReport:
    case: CaseLabel
    verdict: ClassificationVerdict
    q: int | None = None
    rank_a1: int | None = None
    h2: sympy.Expr | None = None
    conditions: list[ConditionRecord] = field(default_factory=list)
    generality: Generality | None = None
    integrability: list[IntegrabilityResult] = field(default_factory=list)
    nonintegrable_labels: list[int] = field(default_factory=list)
    general_rank: int | None = None
    sigma2_dimension: int | None = None
    modules: list[TwoFormModule] = field(default_factory=list)
    degeneracy: DegeneracyResult | None = None
    douglas: str | None = None
    pfaffian: list[str] = field(default_factory=list)
    caveats: list[str] = field(default_factory=list)
    eig: EigenData | None = None
    sf: StructureFunctions | None = None
    bnii: BniiData | None = None

    def condition(self, condition_id: str) -> ConditionRecord | None:
        return next((c for c in self.conditions if c.id == condition_id), None)

    def failing(self) -> list[ConditionRecord]:
        return [
            c for c in self.conditions
            if c.verdict is Verdict.NONZERO and c.id not in INFORMATIONAL_CONDITIONS
        ]


# ---------------------------------------------------------------------------
# Case detection
# ---------------------------------------------------------------------------

def case_a_condition(geo: GeometryData, tester: ZeroTester) -> ConditionRecord:
    """``Phi - Phi^1_1 I = 0``: the only case where Sigma^0 generates a differential ideal."""
    n = geo.n
    scalar = geo.phi[0][0]
    verdicts = []
    witness = None
    for a in range(n):
        for b in range(n):
            entry = tidy(geo.phi[a][b] - (scalar if a == b else 0))
            verdict = tester.verdict(entry)
            verdicts.append(verdict)
            if verdict is Verdict.NONZERO and witness is None:
                witness = entry
    return ConditionRecord("C-A", "Phi is a multiple of the identity", combine(verdicts), witness)


def detect_case(geo: GeometryData, eig: EigenData | None, tester: ZeroTester) -> CaseLabel:
    case_a = case_a_condition(geo, tester)
    if case_a.verdict is Verdict.ZERO:
        return "A"
    if case_a.verdict is Verdict.INCONCLUSIVE or eig is None:
        return "Inconclusive"
    if not eig.diagonalizable:
        return "D-detected"
    if eig.repeated_pairs():
        return "C-detected"
    if eig.has_inconclusive_pair():
        return "Inconclusive"
    return "B"  # refined by classify()


# ---------------------------------------------------------------------------
# Step-1 systems
# ---------------------------------------------------------------------------

def sigma1_membership(r: list[sympy.Expr], sf: StructureFunctions, tester: ZeroTester) -> Verdict:
    """Cyclic curvature condition ``r_a C^a_{cb} + r_b C^b_{ac} + r_c C^c_{ba} = 0``."""
    verdicts = []
    for a, b, c in combinations(range(sf.n), 3):
        value = r[a] * sf.curv[a][c][b] + r[b] * sf.curv[b][a][c] + r[c] * sf.curv[c][b][a]
        verdicts.append(tester.verdict(tidy(value)))
    return combine(verdicts)


def sigma_tilde1_di_test(sf: StructureFunctions, tester: ZeroTester) -> ConditionRecord:
    """``tauG^a_b = 0`` and ``tauV^a_{bc} = 0`` for distinct indices."""
    n = sf.n
    candidates = [(sf.tau_gamma[a][b]) for a, b in permutations(range(n), 2)]
    candidates += [sf.tau_v[a][b][c] for a, b, c in permutations(range(n), 3)]
    verdicts = []
    witness = None
    for value in candidates:
        verdict = tester.verdict(value)
        verdicts.append(verdict)
        if verdict is Verdict.NONZERO and witness is None:
            witness = value
    return ConditionRecord(
        "C-DI1",
        "Sigma~1 generates a differential ideal (tauGamma and tauV vanish off-diagonal)",
        combine(verdicts),
        witness,
    )


def general_step1_rows(sf: StructureFunctions) -> list[list[sympy.Expr]]:
    """Coefficient rows, in unknowns r_1..r_n, of the condition that d(r_a omega^a) lies in <Sigma~1>."""
    n = sf.n
    zero = sympy.Integer(0)
    rows: list[list[sympy.Expr]] = []

    def row(entries: dict[int, sympy.Expr]) -> list[sympy.Expr]:
        out = [zero] * n
        for k, value in entries.items():
            out[k] = tidy(out[k] + value)
        return out

    for a, b in combinations(range(n), 2):
        rows.append(row({a: sf.tau_gamma[a][b], b: sf.tau_gamma[b][a]}))
    for a, b, c in permutations(range(n), 3):
        for table in (sf.tau_v, sf.tau_h):
            rows.append(row({
                a: table[a][b][c] - table[a][c][b],
                b: -table[b][c][a],
                c: table[c][b][a],
            }))
    for a, b, c in combinations(range(n), 3):
        rows.append(row({a: sf.curv[a][c][b], b: sf.curv[b][a][c], c: sf.curv[c][b][a]}))
    return [r for r in rows if any(entry != 0 for entry in r)]


def a1_rows(sf: StructureFunctions, order: list[int]) -> list[tuple[sympy.Expr, sympy.Expr]]:
    """Rows of the coefficient matrix A_1 in (r_1, r_2); ``order`` puts the non-integrable pair first."""
    i, j = order[0], order[1]
    tv, th, curv = sf.tau_v, sf.tau_h, sf.curv
    rows = [(sf.tau_gamma[i][j], sf.tau_gamma[j][i])]
    zero = sympy.Integer(0)
    for al in order[2:]:
        rows += [
            (sf.tau_gamma[i][al], zero),
            (zero, sf.tau_gamma[j][al]),
            (tv[i][j][al] - tv[i][al][j], -tv[j][al][i]),
            (tv[i][j][al], -tv[j][i][al]),
            (th[i][j][al] - th[i][al][j], -th[j][al][i]),
            (th[i][j][al], -th[j][i][al]),
            (curv[i][j][al], -curv[j][i][al]),
        ]
    return [(tidy(p), tidy(q)) for p, q in rows]


def a1_rank(
    rows: list[tuple[sympy.Expr, sympy.Expr]], tester: ZeroTester
) -> tuple[int | None, sympy.Expr | None]:
    """Rank of A_1 from zero tests of entries and 2x2 minors; None when undecided."""
    entries = [tester.verdict(e) for row in rows for e in row]
    if all(v is Verdict.ZERO for v in entries):
        return 0, None
    minors = []
    for (p1, q1), (p2, q2) in combinations(rows, 2):
        minor = tidy(p1 * q2 - p2 * q1)
        verdict = tester.verdict(minor)
        if verdict is Verdict.NONZERO:
            return 2, minor
        minors.append(verdict)
    if Verdict.NONZERO in entries and all(v is Verdict.ZERO for v in minors):
        return 1, None
    return None, None


# ---------------------------------------------------------------------------
# Rank-1 subcase
# ---------------------------------------------------------------------------

def _xi(sf: StructureFunctions, a: int, c: int) -> Form:
    return sf.xi_diag(a) if a == c else sf.xi_off(a, c)


def _form_record(
    condition_id: str, tag: str, form: Form, tester: ZeroTester
) -> ConditionRecord:
    verdicts = []
    witness = None
    detail = ""
    names = form.frame.covector_labels
    for key, value in form.items():
        verdict = tester.verdict(tidy(value))
        verdicts.append(verdict)
        if verdict is Verdict.NONZERO and witness is None:
            witness = tidy(value)
            detail = " ^ ".join(names[k] for k in key)
    return ConditionRecord(condition_id, tag, combine(verdicts), witness, detail)


def bnii_conditions(
    sf: StructureFunctions,
    order: list[int],
    rows: list[tuple[sympy.Expr, sympy.Expr]],
    tester: ZeroTester,
) -> tuple[BniiData | None, list[ConditionRecord]]:
    """Ledger of the rank-1 subcase. Returns no BniiData when h2 is undefined."""
    i, j, alphas = order[0], order[1], order[2:]
    records: list[ConditionRecord] = []

    h2 = None
    for p, q in rows:
        if tester.verdict(p) is Verdict.NONZERO and tester.verdict(q) is Verdict.NONZERO:
            h2 = tidy(-p / q)
            break

    gamma_alpha = [sf.tau_gamma[i][al] for al in alphas] + [sf.tau_gamma[j][al] for al in alphas]
    verdicts = [tester.verdict(v) for v in gamma_alpha]
    witness = next((v for v, verdict in zip(gamma_alpha, verdicts) if verdict is Verdict.NONZERO), None)
    records.append(ConditionRecord(
        "C-51", "tauGamma^1_alpha = tauGamma^2_alpha = 0", combine(verdicts), witness
    ))

    if h2 is None:
        witness = next((e for row in rows for e in row if tester.verdict(e) is Verdict.NONZERO), None)
        records.append(ConditionRecord(
            "C-52",
            "a ratio r_2/r_1 is well defined",
            Verdict.NONZERO if witness is not None else Verdict.INCONCLUSIVE,
            witness,
            "the step-1 system forces r_1 = 0 or r_2 = 0",
        ))
        return None, records

    verdicts = []
    witness = None
    for p, q in rows:
        vp, vq = tester.verdict(p), tester.verdict(q)
        if vp is Verdict.ZERO and vq is Verdict.ZERO:
            continue
        if Verdict.INCONCLUSIVE in (vp, vq):
            verdicts.append(Verdict.INCONCLUSIVE)
            continue
        if vp is not vq:
            verdicts.append(Verdict.NONZERO)
            witness = witness if witness is not None else (p if vp is Verdict.NONZERO else q)
            continue
        residual = tidy(p + h2 * q)
        verdict = tester.verdict(residual)
        verdicts.append(verdict)
        if verdict is Verdict.NONZERO and witness is None:
            witness = residual
    records.append(ConditionRecord(
        "C-52", "every defined ratio equals h2", combine(verdicts), witness
    ))

    bnii = BniiData(sf=sf, order=list(order), h2=h2)
    frame = sf.frame

    congruence = Form.differential(frame, h2) + _xi(sf, i, j) + (
        _xi(sf, j, j) - _xi(sf, i, i)
    ).scale(h2)
    records.append(_form_record(
        "C-56",
        "dh2 + xi^1_2 + h2 (xi^2_2 - xi^1_1) = 0 mod phi^2V, phi^2H",
        congruence.without([sf.v(j), sf.h(j)]),
        tester,
    ))

    records.append(_form_record(
        "C-510", "d(xi^1_1 + h2 xi^2_1) = 0", bnii.xi_tilde(i).exterior_derivative().tidied(), tester
    ))

    torsion_verdicts = []
    torsion_witness = None
    torsion_detail = ""
    for al in alphas:
        xi_tilde_alpha = bnii.xi_tilde(al)
        torsion = (_xi(sf, al, al) - bnii.xi_tilde(i)).wedge(xi_tilde_alpha)
        torsion = torsion + xi_tilde_alpha.exterior_derivative()
        record = _form_record("C-511", "", torsion.without([sf.v(al), sf.h(al)]), tester)
        torsion_verdicts.append(record.verdict)
        if record.witness is not None and torsion_witness is None:
            torsion_witness, torsion_detail = record.witness, record.detail
    records.append(ConditionRecord(
        "C-511",
        "(xi^alpha_alpha - xi~1_1) ^ xi~1_alpha + d xi~1_alpha = 0 mod phi^alphaV, phi^alphaH",
        combine(torsion_verdicts),
        torsion_witness,
        torsion_detail,
    ))
    return bnii, records


def pfaffian_system(bnii: BniiData, labels: list[int]) -> list[str]:
    """Printable Pfaffian equations for r~1 and r_alpha; ``labels`` maps indices to user labels."""
    sf = bnii.sf
    one = labels[bnii.i]
    lines = [f"xi~{one}_{one} = {describe_form(bnii.xi_tilde(bnii.i))}"]
    for al in bnii.alphas:
        user = labels[al]
        lines.append(f"xi~{one}_{user} = {describe_form(bnii.xi_tilde(al))}")
        lines.append(f"xi^{user}_{user} = {describe_form(sf.xi_diag(al))}")
    lines.append(f"d r~{one} + r~{one} xi~{one}_{one} = 0")
    for al in bnii.alphas:
        user = labels[al]
        lines.append(
            f"d r_{user} + r~{one} xi~{one}_{user} + r_{user} xi^{user}_{user}"
            f" = -P_{user} phi{user}V - Q_{user} phi{user}H"
        )
    return lines


def describe_form(form: Form) -> str:
    terms = form.tidied().describe()
    if not terms:
        return "0"
    return " + ".join(f"({to_source(value)}) {name}" for name, value in terms)


# ---------------------------------------------------------------------------
# Modules, degeneracy and generality
# ---------------------------------------------------------------------------

def sigma_tilde1_module(sf: StructureFunctions, labels: list[int]) -> TwoFormModule:
    return TwoFormModule(step=1, basis=[(f"omega{labels[a]}", sf.omega(a)) for a in range(sf.n)])


def sigma_tilde2_module(bnii: BniiData, labels: list[int]) -> TwoFormModule:
    sf = bnii.sf
    first = sf.omega(bnii.i) + sf.omega(bnii.j).scale(bnii.h2)
    basis = [(f"omega~{labels[bnii.i]}", first)]
    basis += [(f"omega{labels[al]}", sf.omega(al)) for al in bnii.alphas]
    return TwoFormModule(step=2, basis=basis)


def degenerate_check(
    module: TwoFormModule, sf: StructureFunctions, tester: ZeroTester
) -> DegeneracyResult:
    """NonRegular when some omega^a appears in no basis form; rank of the summed basis must be 2n."""
    missing = []
    inconclusive = False
    for a in range(sf.n):
        verdicts = [tester.verdict(form.component(sf.v(a), sf.h(a))) for _, form in module.basis]
        if all(v is Verdict.ZERO for v in verdicts):
            missing.append(a + 1)
        elif not any(v is Verdict.NONZERO for v in verdicts):
            inconclusive = True

    total = Form.zero(sf.frame, 2)
    for _, form in module.basis:
        total = total + form
    dim = sf.frame.dim
    matrix = [[total.component(r, c) for c in range(dim)] for r in range(dim)]
    rank = tester.generic_rank(matrix)
    maximal = rank == 2 * sf.n

    if missing:
        verdict = "NonRegular"
    elif inconclusive:
        verdict = "Inconclusive"
    else:
        verdict = "Regular"
    return DegeneracyResult(verdict=verdict, missing=missing, rank=rank, maximal_rank=maximal)


def cartan_generality(n: int) -> Generality:
    """Cartan characters of the BNII tableau: ``s1 = s2 = n - 2`` and ``t = 3(n - 2)``."""
    s1 = s2 = max(n - 2, 0)
    t = 3 * s1
    assert t == s1 + 2 * s2
    if s2 == 0:
        text = "no free functions at this level"
    elif s2 == 1:
        text = "1 function of 2 variables"
    else:
        text = f"{s2} functions of 2 variables"
    return Generality(s1=s1, s2=s2, t=t, text=text)


def douglas_note(n: int, case: str, q: int | None, rank: int | None) -> str | None:
    if n != 2:
        return None
    if case == "A":
        return "corresponds to Douglas's case I"
    if case == "D-detected":
        return "corresponds to Douglas's case IIb"
    if case == "B-q0":
        return "corresponds to Douglas's case IIa1"
    if case == "B-q1" and rank == 0:
        return "corresponds to Douglas's case IIa2"
    if case == "BNII0":
        return "corresponds to Douglas's case IIa3"
    if case == "BNII1":
        return "may correspond to case III of Douglas"
    return None


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

def _out_of_scope(case: CaseLabel, caveat: str, **kwargs) -> ClassificationReport:
    report = ClassificationReport(case=case, verdict=ClassificationVerdict.OUT_OF_SCOPE, **kwargs)
    report.caveats.append(caveat)
    return report


def classify(
    geo: GeometryData,
    tester: ZeroTester,
    eig: EigenData | None = None,
    resolve: dict | None = None,
) -> ClassificationReport:
    """Run the classification. ``eig`` wins over ``resolve`` (keyword arguments for resolve_eigendata)."""
    n = geo.n
    case_a = case_a_condition(geo, tester)
    if case_a.verdict is Verdict.ZERO:
        logger.debug("Phi is a multiple of the identity: Case A")
        report = _out_of_scope(
            "A",
            "Case A: Sigma^0 generates a differential ideal; its analysis is outside this tool",
            conditions=[case_a],
        )
        report.douglas = douglas_note(n, "A", None, None)
        return report
    if case_a.verdict is Verdict.INCONCLUSIVE:
        return ClassificationReport(
            case="Inconclusive",
            verdict=ClassificationVerdict.INCONCLUSIVE,
            conditions=[case_a],
            caveats=["cannot decide whether Phi is a multiple of the identity"],
        )

    if eig is None:
        eig = resolve_eigendata(geo, tester, **(resolve or {}))
    case = detect_case(geo, eig, tester)
    if case == "D-detected":
        report = _out_of_scope(
            "D-detected", "Phi is not diagonalizable (Case D); analysis out of scope",
            conditions=[case_a], eig=eig,
        )
        report.douglas = douglas_note(n, case, None, None)
        return report
    if case == "C-detected":
        pairs = ", ".join(f"lambda{a + 1} = lambda{b + 1}" for a, b in eig.repeated_pairs())
        return _out_of_scope(
            "C-detected", f"repeated eigenvalues ({pairs}), Case C; analysis out of scope",
            conditions=[case_a], eig=eig,
        )
    if case == "Inconclusive":
        return ClassificationReport(
            case="Inconclusive",
            verdict=ClassificationVerdict.INCONCLUSIVE,
            conditions=[case_a],
            caveats=["cannot decide whether the eigenvalues are distinct"],
            eig=eig,
        )

    sf = structure_functions(geo, eig, tester)
    labels = list(range(1, n + 1))
    census = [integrability_test(sf, a, tester) for a in range(n)]
    report = ClassificationReport(
        case="Inconclusive",
        verdict=ClassificationVerdict.INCONCLUSIVE,
        conditions=[case_a, sigma_tilde1_di_test(sf, tester)],
        integrability=census,
        eig=eig,
        sf=sf,
    )
    report.caveats.extend(eig.caveats)
    for description, test in sf.consistency:
        if test.verdict is Verdict.INCONCLUSIVE:
            report.caveats.append(f"expansion check {description} is numerically satisfied only")

    if any(c.verdict is Integrability.INCONCLUSIVE for c in census):
        report.caveats.append("integrability of some eigen co-distribution is undecided")
        return report

    nonintegrable = [c.label - 1 for c in census if c.verdict is Integrability.NON_INTEGRABLE]
    q = len(nonintegrable)
    report.q = q
    report.nonintegrable_labels = [a + 1 for a in nonintegrable]
    report.modules.append(sigma_tilde1_module(sf, labels))
    if not report.modules[0].is_independent(tester):
        report.caveats.append("the omega^a are not independent at the sample points")

    general = general_step1_rows(sf)
    report.general_rank = tester.generic_rank(general)
    report.sigma2_dimension = n - report.general_rank
    logger.debug("q = %d, general step-1 rank %d", q, report.general_rank)

    if q != 2:
        report.case = f"B-q{q}"
        report.verdict = ClassificationVerdict.OUT_OF_SCOPE
        report.caveats.append(
            f"{q} non-integrable eigen co-distributions; only the case of exactly two is analysed"
        )
        report.douglas = douglas_note(n, report.case, q, report.general_rank)
        return report

    integrable = [a for a in range(n) if a not in nonintegrable]
    order = nonintegrable + integrable
    rows = a1_rows(sf, order)
    rank, minor = a1_rank(rows, tester)
    report.rank_a1 = rank
    if rank is not None and rank != report.general_rank:
        logger.warning(
            "Step-1 system rank %d differs from the rank %d of the specialised matrix",
            report.general_rank,
            rank,
        )

    if rank is None:
        report.caveats.append("rank of the step-1 coefficient matrix is undecided")
        return report

    if rank == 0:
        report.case = "BNII0"
        report.verdict = ClassificationVerdict.OUT_OF_SCOPE
        report.generality = cartan_generality(n)
        report.generality.text = f"{report.generality.text} (when the external existence conditions hold)"
        report.degeneracy = degenerate_check(report.modules[0], sf, tester)
        report.caveats.append(
            "Sigma~1 generates a differential ideal; the existence conditions for this case are external"
        )
        report.douglas = douglas_note(n, "BNII0", q, rank)
        return report

    if rank == 2:
        report.case = "B-NoSolution"
        report.verdict = ClassificationVerdict.NOT_VARIATIONAL
        report.conditions.append(ConditionRecord(
            "C-52", "the step-1 system has only the solution r_1 = r_2 = 0", Verdict.NONZERO, minor,
            "non-vanishing 2x2 minor of the step-1 coefficient matrix",
        ))
        return report

    bnii, records = bnii_conditions(sf, order, rows, tester)
    report.conditions.extend(records)
    report.case = "BNII1"
    report.douglas = douglas_note(n, "BNII1", q, rank)
    if bnii is None:
        report.verdict = _verdict_from(records)
        return report

    report.h2 = bnii.h2
    report.bnii = bnii
    report.modules.append(sigma_tilde2_module(bnii, labels))
    report.pfaffian = pfaffian_system(bnii, labels)
    report.verdict = _verdict_from(records)
    if report.verdict is ClassificationVerdict.VARIATIONAL:
        report.degeneracy = degenerate_check(report.modules[-1], sf, tester)
        report.conditions.append(degeneracy_condition(report.degeneracy, sf.n))
        report.verdict = _verdict_from([*records, report.conditions[-1]])
        if report.degeneracy.verdict == "NonRegular":
            report.caveats.append("the final module misses some omega^a: no regular solution")
        if report.verdict is ClassificationVerdict.VARIATIONAL:
            report.generality = cartan_generality(n)
    return report


def degeneracy_condition(result: DegeneracyResult, n: int) -> ConditionRecord:
    """Ledger entry for a regular, maximal-rank final module."""
    detail = f"rank {result.rank} of {2 * n}"
    if result.verdict == "NonRegular":
        verdict = Verdict.NONZERO
        detail = "missing " + ", ".join(f"omega{a}" for a in result.missing)
    elif result.verdict == "Inconclusive":
        verdict = Verdict.INCONCLUSIVE
    else:
        verdict = Verdict.ZERO if result.maximal_rank else Verdict.NONZERO
    return ConditionRecord("C-DEG", "the final module is regular", verdict, None, detail)


def _verdict_from(records: list[ConditionRecord]) -> ClassificationVerdict:
    verdict = combine(r.verdict for r in records)
    if verdict is Verdict.ZERO:
        return ClassificationVerdict.VARIATIONAL
    if verdict is Verdict.NONZERO:
        return ClassificationVerdict.NOT_VARIATIONAL
    return ClassificationVerdict.INCONCLUSIVE
