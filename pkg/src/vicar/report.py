"""JSON report models.

Every expression is printed with ``to_source`` so the report can be fed back
into a problem file. Reports carry no timestamps or timings: the same problem
and seed give byte-identical JSON.
"""

from __future__ import annotations

import json

import sympy
from pydantic import BaseModel

from vicar import __version__
from vicar.algebra.printer import to_source
from vicar.analysis.classify import ClassificationReport, TwoFormModule, describe_form
from vicar.analysis.eigenframe import EigenData, StructureFunctions
from vicar.analysis.helmholtz import ClosedFormResult, HelmholtzResult, Multiplier, PfaffianResult
from vicar.geometry.sode import GeometryData


def render(expr: sympy.Expr | None) -> str | None:
    if expr is None:
        return None
    try:
        return to_source(sympy.sympify(expr))
    except ValueError:
        return str(expr)


class NamedExpression(BaseModel):
    name: str
    value: str


class GeometrySection(BaseModel):
    gamma: list[list[str]]
    phi: list[list[str]]
    curvature: list[NamedExpression]


class IntegrabilityEntry(BaseModel):
    label: int
    verdict: str
    witnesses: list[NamedExpression] = []


class EigenSection(BaseModel):
    source: str
    eigenvalues: list[str]
    vectors: list[list[str]]
    forms: list[list[str]]
    distinct: list[list[str]]
    structure_functions: list[NamedExpression] = []
    integrability: list[IntegrabilityEntry] = []


class ConditionEntry(BaseModel):
    id: str
    tag: str
    verdict: str
    witness: str | None = None
    detail: str = ""


class GeneralityEntry(BaseModel):
    s1: int
    s2: int
    t: int
    text: str


class ModuleEntry(BaseModel):
    step: int
    basis: list[str]


class DegeneracyEntry(BaseModel):
    verdict: str
    missing: list[int] = []
    rank: int
    maximal_rank: bool


class ClassificationSection(BaseModel):
    case: str
    verdict: str
    q: int | None = None
    nonintegrable_labels: list[int] = []
    rank_a1: int | None = None
    general_rank: int | None = None
    sigma2_dimension: int | None = None
    h2: str | None = None
    conditions: list[ConditionEntry] = []
    generality: GeneralityEntry | None = None
    modules: list[ModuleEntry] = []
    degeneracy: DegeneracyEntry | None = None
    douglas: str | None = None
    pfaffian: list[str] = []


class ResidualEntry(BaseModel):
    name: str
    verdict: str
    residual: str


class ClosedFormEntry(BaseModel):
    closed: str
    groups: dict[str, str]
    derivability: str | None = None
    rank: int
    maximal_rank: bool


class PfaffianAlphaEntry(BaseModel):
    label: int
    verdict: str
    P: str
    Q: str


class PfaffianEntry(BaseModel):
    verdict: str
    sigma1: str
    sigma1_residual: str
    alphas: list[PfaffianAlphaEntry] = []


class HelmholtzSection(BaseModel):
    source: str
    verdict: str
    g: list[list[str]]
    conditions: list[ResidualEntry] = []
    det: str | None = None
    det_verdict: str
    closed_form: ClosedFormEntry | None = None
    pfaffian: PfaffianEntry | None = None


class Report(BaseModel):
    tool: str = "vicar"
    version: str = __version__
    problem: str
    n: int
    seed: int
    samples: int
    geometry: GeometrySection
    eigen: EigenSection | None = None
    classification: ClassificationSection
    helmholtz: list[HelmholtzSection] = []
    caveats: list[str] = []
    zero_tests: dict[str, int] = {}

    def to_json(self) -> str:
        return self.model_dump_json(indent=2) + "\n"


def report_schema() -> str:
    return json.dumps(Report.model_json_schema(), indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# Builders
# ---------------------------------------------------------------------------

def geometry_section(geo: GeometryData) -> GeometrySection:
    n = geo.n
    curvature = [
        NamedExpression(name=f"R[{d + 1}][{a + 1}][{b + 1}]", value=render(value))
        for (d, a, b), value in sorted(geo.curvature_upper.items())
        if value != 0
    ]
    return GeometrySection(
        gamma=[[render(geo.gamma[a][b]) for b in range(n)] for a in range(n)],
        phi=[[render(geo.phi[a][b]) for b in range(n)] for a in range(n)],
        curvature=curvature,
    )


def eigen_section(
    eig: EigenData, sf: StructureFunctions | None, report: ClassificationReport
) -> EigenSection:
    section = EigenSection(
        source=eig.source,
        eigenvalues=[render(e) for e in eig.eigenvalues],
        vectors=[[render(c) for c in v] for v in eig.vectors],
        forms=[[render(c) for c in row] for row in eig.forms],
        distinct=[[v.value for v in row] for row in eig.distinct],
    )
    if sf is not None:
        section.structure_functions = [
            NamedExpression(name=name, value=render(value)) for name, value in sf.entries() if value != 0
        ]
    section.integrability = [
        IntegrabilityEntry(
            label=result.label,
            verdict=result.verdict.value,
            witnesses=[NamedExpression(name=name, value=render(value)) for name, value in result.witnesses],
        )
        for result in report.integrability
    ]
    return section


def _module_entry(module: TwoFormModule) -> ModuleEntry:
    return ModuleEntry(
        step=module.step,
        basis=[f"{label} = {describe_form(form)}" for label, form in module.basis],
    )


def classification_section(report: ClassificationReport) -> ClassificationSection:
    section = ClassificationSection(
        case=report.case,
        verdict=report.verdict.value,
        q=report.q,
        nonintegrable_labels=report.nonintegrable_labels,
        rank_a1=report.rank_a1,
        general_rank=report.general_rank,
        sigma2_dimension=report.sigma2_dimension,
        h2=render(report.h2),
        conditions=[
            ConditionEntry(
                id=c.id, tag=c.tag, verdict=c.verdict.value, witness=render(c.witness), detail=c.detail
            )
            for c in report.conditions
        ],
        modules=[_module_entry(m) for m in report.modules],
        douglas=report.douglas,
        pfaffian=report.pfaffian,
    )
    if report.generality is not None:
        g = report.generality
        section.generality = GeneralityEntry(s1=g.s1, s2=g.s2, t=g.t, text=g.text)
    if report.degeneracy is not None:
        d = report.degeneracy
        section.degeneracy = DegeneracyEntry(
            verdict=d.verdict, missing=d.missing, rank=d.rank, maximal_rank=d.maximal_rank
        )
    return section


def helmholtz_verdict_text(result: HelmholtzResult, closed: ClosedFormResult | None = None) -> str:
    verdict = result.verdict.value
    if closed is not None and verdict == "Zero" and not closed.passed:
        verdict = "Inconclusive" if closed.closed.value == "Inconclusive" else "NonZero"
    return {"Zero": "Pass", "NonZero": "Fail", "Inconclusive": "Inconclusive"}[verdict]


def helmholtz_section(
    source: str,
    g: Multiplier,
    result: HelmholtzResult,
    closed: ClosedFormResult | None = None,
    pfaffian: PfaffianResult | None = None,
    labels: dict[int, int] | None = None,
) -> HelmholtzSection:
    section = HelmholtzSection(
        source=source,
        verdict=helmholtz_verdict_text(result, closed),
        g=[[render(entry) for entry in row] for row in g.rows()],
        conditions=[
            ResidualEntry(name=c.name, verdict=c.verdict.value, residual=render(c.residual))
            for c in result.conditions
        ],
        det=render(result.det),
        det_verdict=result.det_verdict.value,
    )
    if closed is not None:
        section.closed_form = ClosedFormEntry(
            closed=closed.closed.value,
            groups={kind: closed.group_verdict(kind).value for kind in sorted(closed.components)},
            derivability=closed.derivability.value if closed.derivability is not None else None,
            rank=closed.rank,
            maximal_rank=closed.maximal_rank,
        )
    if pfaffian is not None:
        labels = labels or {}
        section.pfaffian = PfaffianEntry(
            verdict=pfaffian.verdict.value,
            sigma1=pfaffian.sigma1.value,
            sigma1_residual=describe_form(pfaffian.sigma1_residual),
            alphas=[
                PfaffianAlphaEntry(label=labels.get(al, al + 1), verdict=v.value, P=render(p), Q=render(q))
                for al, v, p, q in pfaffian.alphas
            ],
        )
    return section
