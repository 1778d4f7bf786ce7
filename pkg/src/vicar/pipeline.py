"""Analysis pipeline: geometry, eigen-structure, classification and Helmholtz checks.

``analyze_problem`` runs every stage and builds the JSON report;
``run_check`` verifies only the candidates of a problem file.
"""

from __future__ import annotations

import logging
import os
import time
from collections.abc import Mapping
from dataclasses import dataclass, field

from pydantic import BaseModel

from vicar.algebra.zero import Verdict, ZeroTester
from vicar.analysis.classify import ClassificationReport, ClassificationVerdict, classify
from vicar.analysis.eigenframe import EigenData, eigen_frame, resolve_eigendata
from vicar.analysis.helmholtz import (
    CartanCandidate,
    Multiplier,
    check_closed_form,
    check_helmholtz,
    multiplier_two_form,
    r_to_g,
    verify_pfaffian_solution,
)
from vicar.errors import MissingCandidate, MissingEigendata
from vicar.geometry.sode import GeometryData, build_geometry
from vicar.problem.loader import CompiledProblem
from vicar.report import (
    HelmholtzSection,
    Report,
    classification_section,
    eigen_section,
    geometry_section,
    helmholtz_section,
)

logger = logging.getLogger(__name__)

SEED_ENV = "VICAR_SEED"

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_INCONCLUSIVE = 2
EXIT_CHECK_FAILED = 3


class AnalysisSettings(BaseModel):
    """Tunables of the zero tester and the finite-difference checks."""
    samples: int = 16
    seed: int = 0
    rtol: float = 1e-9
    nonzero_factor: float = 10.0
    fd_step: float = 1e-6
    fd_tolerance: float = 1e-5

    def tester(self, problem: CompiledProblem) -> ZeroTester:
        sode = problem.sode
        return ZeroTester(
            sode.box,
            sode.symbols.jet,
            samples=self.samples,
            seed=self.seed,
            rtol=self.rtol,
            nonzero_factor=self.nonzero_factor,
        )


def resolve_seed(
    flag: int | None, file_seed: int | None = 0, environ: Mapping[str, str] | None = None
) -> int | None:
    """``--seed`` flag, then VICAR_SEED, then the file's seed."""
    if flag is not None:
        return flag
    environ = os.environ if environ is None else environ
    value = environ.get(SEED_ENV)
    if value not in (None, ""):
        try:
            return int(value)
        except ValueError as e:
            raise ValueError(f"{SEED_ENV} must be an integer, got '{value}'") from e
    return file_seed


def settings_for(
    problem: CompiledProblem, seed: int | None = None, samples: int | None = None
) -> AnalysisSettings:
    return AnalysisSettings(
        seed=resolve_seed(seed, problem.model.seed),
        samples=samples if samples is not None else problem.model.samples,
    )


@dataclass
class AnalysisOutcome:
    report: Report
    classification: ClassificationReport
    geometry: GeometryData
    exit_code: int
    helmholtz: list[HelmholtzSection] = field(default_factory=list)
    tester: ZeroTester | None = None


class _Stage:
    """Context manager that logs a stage's entry and duration at DEBUG."""

    def __init__(self, name: str):
        self.name = name

    def __enter__(self):
        logger.debug("Stage %s: start", self.name)
        self.started = time.perf_counter()
        return self

    def __exit__(self, *exc):
        logger.debug("Stage %s: %.3fs", self.name, time.perf_counter() - self.started)
        return False


def _eigen_kwargs(problem: CompiledProblem) -> dict:
    block = problem.model.eigen
    kwargs: dict = {}
    if block is not None:
        kwargs["normalize"] = block.normalize
        kwargs["diagonalizable"] = block.diagonalizable
    if problem.eigenvalues is not None:
        kwargs["eigenvalues"] = problem.eigenvalues
        kwargs["vectors"] = problem.vectors
    return kwargs


def _resolve_for_candidate(
    problem: CompiledProblem, geo: GeometryData, tester: ZeroTester, eig: EigenData | None
) -> EigenData:
    if eig is not None and eig.forms:
        return eig
    eig = resolve_eigendata(geo, tester, **_eigen_kwargs(problem))
    if not eig.forms:
        raise MissingEigendata("A Cartan candidate needs a diagonalizable Phi with eigendata")
    return eig


def _candidate_sections(
    problem: CompiledProblem,
    geo: GeometryData,
    tester: ZeroTester,
    classification: ClassificationReport | None,
) -> list[HelmholtzSection]:
    sections: list[HelmholtzSection] = []
    if problem.multiplier is not None:
        g = Multiplier.from_rows(problem.multiplier)
        result = check_helmholtz(g, geo, tester)
        closed = check_closed_form(multiplier_two_form(g, geo), geo, tester)
        sections.append(helmholtz_section("multiplier", g, result, closed))

    if problem.cartan_r is not None:
        known = classification.eig if classification else None
        eig = _resolve_for_candidate(problem, geo, tester, known)
        candidate = CartanCandidate(problem.cartan_r)
        g = r_to_g(candidate, eig)
        result = check_helmholtz(g, geo, tester)
        omega = candidate.two_form(eigen_frame(geo, eig))
        closed = check_closed_form(omega, geo, tester)

        pfaffian = None
        bnii = classification.bnii if classification is not None else None
        if problem.r1_tilde is not None or problem.r_alpha:
            if bnii is None:
                logger.warning("Pfaffian candidate ignored: the system is not in the rank-1 subcase")
            else:
                r1 = problem.r1_tilde if problem.r1_tilde is not None else candidate.r[bnii.i][bnii.i]
                r_alpha = {label - 1: value for label, value in problem.r_alpha.items()}
                pfaffian = verify_pfaffian_solution(r1, r_alpha, bnii, tester)
        sections.append(helmholtz_section("cartan", g, result, closed, pfaffian))
    return sections


def analyze_problem(problem: CompiledProblem, settings: AnalysisSettings) -> AnalysisOutcome:
    """Run every stage; errors from eigen resolution propagate to the caller."""
    with _Stage("geometry"):
        geo = build_geometry(problem.sode)
    tester = settings.tester(problem)

    with _Stage("classification"):
        kwargs = _eigen_kwargs(problem)
        classification = classify(geo, tester, resolve=kwargs)

    with _Stage("helmholtz"):
        sections = _candidate_sections(problem, geo, tester, classification)

    caveats = list(classification.caveats)
    report = Report(
        problem=problem.model.name,
        n=problem.model.n,
        seed=settings.seed,
        samples=settings.samples,
        geometry=geometry_section(geo),
        classification=classification_section(classification),
        helmholtz=sections,
        caveats=caveats,
    )
    if classification.eig is not None:
        report.eigen = eigen_section(classification.eig, classification.sf, classification)
    report.zero_tests = dict(sorted(tester.stats.items()))

    exit_code = EXIT_OK
    if classification.verdict is ClassificationVerdict.INCONCLUSIVE:
        exit_code = EXIT_INCONCLUSIVE
    elif any(section.verdict == "Inconclusive" for section in sections):
        exit_code = EXIT_INCONCLUSIVE
    return AnalysisOutcome(report, classification, geo, exit_code, sections, tester)


def run_check(
    problem: CompiledProblem, settings: AnalysisSettings
) -> tuple[list[HelmholtzSection], int]:
    """Verify only the problem's candidates; exit 0 pass, 2 inconclusive, 3 fail."""
    if not problem.model.has_candidate:
        raise MissingCandidate(
            f"'{problem.model.name}' has neither a 'multiplier' nor a 'cartan.r' candidate"
        )
    geo = build_geometry(problem.sode)
    tester = settings.tester(problem)
    classification = None
    if problem.cartan_r is not None and (problem.r1_tilde is not None or problem.r_alpha):
        classification = classify(geo, tester, resolve=_eigen_kwargs(problem))
    sections = _candidate_sections(problem, geo, tester, classification)

    verdicts = [section.verdict for section in sections]
    pfaffian_verdicts = [s.pfaffian.verdict for s in sections if s.pfaffian is not None]
    if "Fail" in verdicts or Verdict.NONZERO.value in pfaffian_verdicts:
        return sections, EXIT_CHECK_FAILED
    if "Inconclusive" in verdicts or Verdict.INCONCLUSIVE.value in pfaffian_verdicts:
        return sections, EXIT_INCONCLUSIVE
    return sections, EXIT_OK
