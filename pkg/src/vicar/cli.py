"""vicar CLI: analyze, check, selftest, validate, init, schema."""

from __future__ import annotations

import logging
import shutil
from pathlib import Path
from typing import Optional

import typer
import yaml
from rich.console import Console
from rich.logging import RichHandler
from rich.markup import escape
from rich.table import Table

from vicar.analysis.classify import INFORMATIONAL_CONDITIONS
from vicar.errors import ProblemFileError, VicarError
from vicar.pipeline import (
    EXIT_CHECK_FAILED,
    EXIT_INPUT_ERROR,
    AnalysisOutcome,
    analyze_problem,
    resolve_seed,
    run_check,
    settings_for,
)
from vicar.problem.loader import CompiledProblem, load_problem, validate_problem
from vicar.report import HelmholtzSection, report_schema
from vicar.selftest import GOLDEN_DIR, discover, run_selftest

app = typer.Typer(
    name="vicar",
    help="vicar: variational classification of second-order ODE systems.",
    no_args_is_help=True,
)
console = Console()

TEMPLATE = {
    "name": "my-system",
    "n": 2,
    "coordinates": ["x", "y"],
    "velocities": ["u", "v"],
    "equations": ["-x", "-2*y"],
    "box": {"t": [0, 1]},
    "seed": 0,
    "samples": 16,
}


# ---------------------------------------------------------------------------
# Helpers
# ---------------------------------------------------------------------------

def _configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )


def _print_errors(messages: list[str]) -> None:
    console.print(f"[red]Found {len(messages)} error(s):[/red]")
    for message in messages:
        console.print(f"  [red]• {escape(message)}[/red]")


def _seed_override(seed: Optional[int]) -> Optional[int]:
    """The --seed flag or VICAR_SEED; None leaves the file's seed in force."""
    try:
        return resolve_seed(seed, None)
    except ValueError as e:
        console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(EXIT_INPUT_ERROR)


def _load(path: Path, seed: Optional[int] = None) -> CompiledProblem:
    """Load a problem file or exit 1 with every error listed."""
    try:
        return load_problem(path, _seed_override(seed))
    except ProblemFileError as e:
        _print_errors(e.messages)
        raise typer.Exit(EXIT_INPUT_ERROR)


def _settings(problem: CompiledProblem, seed: Optional[int], samples: Optional[int]):
    try:
        return settings_for(problem, seed, samples)
    except ValueError as e:
        console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(EXIT_INPUT_ERROR)


def _verdict_style(verdict: str) -> str:
    if verdict in ("Variational", "Pass", "Zero"):
        return "green"
    if verdict in ("NotVariational", "Fail", "NonZero"):
        return "red"
    return "yellow"


def _helmholtz_rows(table: Table, sections: list[HelmholtzSection]) -> None:
    for section in sections:
        style = _verdict_style(section.verdict)
        value = f"[{style}]{section.verdict}[/{style}]"
        failing = [c.name for c in section.conditions if c.verdict == "NonZero"]
        if failing:
            value += f" (failing: {escape(', '.join(failing))})"
        if section.det is not None:
            value += f", det g = {escape(section.det)}"
        table.add_row(f"Helmholtz ({section.source})", value)
        if section.pfaffian is not None:
            table.add_row("Pfaffian candidate", section.pfaffian.verdict)


def _print_summary(outcome: AnalysisOutcome) -> None:
    report = outcome.report
    section = report.classification
    table = Table(title=f"Problem: {escape(report.problem)}", show_header=False, border_style="cyan")
    table.add_column("Key", style="bold")
    table.add_column("Value")

    table.add_row("n", str(report.n))
    table.add_row("Case", escape(section.case))
    style = _verdict_style(section.verdict)
    table.add_row("Verdict", f"[{style}]{section.verdict}[/{style}]")
    if section.q is not None:
        labels = ", ".join(str(label) for label in section.nonintegrable_labels)
        table.add_row("Non-integrable", labels or "none")
    if section.rank_a1 is not None:
        table.add_row("Rank of A1", str(section.rank_a1))
    if section.h2 is not None:
        table.add_row("h2", escape(section.h2))
    failing = [
        f"{c.id} ({c.detail})" if c.detail else c.id
        for c in section.conditions
        if c.verdict == "NonZero" and c.id not in INFORMATIONAL_CONDITIONS
    ]
    if failing:
        table.add_row("Failing conditions", escape(", ".join(failing)))
    if section.generality is not None:
        table.add_row("Generality", escape(section.generality.text))
    if section.douglas:
        table.add_row("Douglas", escape(section.douglas))
    _helmholtz_rows(table, outcome.helmholtz)
    console.print(table)

    for caveat in report.caveats:
        console.print(f"[yellow]Note: {escape(caveat)}[/yellow]")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

@app.callback()
def main(
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log pipeline stages at DEBUG"),
) -> None:
    _configure_logging(verbose)


@app.command()
def analyze(
    path: Path = typer.Argument(..., help="Problem file (.vicar)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Write the JSON report here"),
    seed: Optional[int] = typer.Option(
        None, "--seed", help="Sampling seed (overrides VICAR_SEED and the file)"
    ),
    samples: Optional[int] = typer.Option(None, "--samples", min=4, help="Number of sample points"),
) -> None:
    """Classify a system and verify any candidates it carries."""
    problem = _load(path, seed)
    settings = _settings(problem, seed, samples)
    try:
        outcome = analyze_problem(problem, settings)
    except VicarError as e:
        console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(EXIT_INPUT_ERROR)

    if out is not None:
        out.write_text(outcome.report.to_json())
        console.print(f"[dim]Report written to {escape(str(out))}[/dim]")
    _print_summary(outcome)
    raise typer.Exit(outcome.exit_code)


@app.command()
def check(
    path: Path = typer.Argument(..., help="Problem file with a multiplier or cartan candidate"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Sampling seed"),
    samples: Optional[int] = typer.Option(None, "--samples", min=4, help="Number of sample points"),
) -> None:
    """Verify only the candidate multipliers of a problem file."""
    problem = _load(path, seed)
    settings = _settings(problem, seed, samples)
    try:
        sections, code = run_check(problem, settings)
    except VicarError as e:
        console.print(f"[red]Error: {escape(str(e))}[/red]")
        raise typer.Exit(EXIT_INPUT_ERROR)

    table = Table(title=f"Check: {escape(problem.model.name)}", show_header=False, border_style="cyan")
    table.add_column("Key", style="bold")
    table.add_column("Value")
    _helmholtz_rows(table, sections)
    console.print(table)
    for section in sections:
        for condition in section.conditions:
            if condition.verdict == "NonZero":
                console.print(
                    f"  [red]{escape(condition.name)}: residual {escape(condition.residual)}[/red]"
                )
    raise typer.Exit(code)


@app.command()
def selftest(
    name_filter: Optional[str] = typer.Option(
        None, "--filter", "-f", help="Run only rows whose name contains this"
    ),
    corpus: Optional[Path] = typer.Option(None, "--corpus", hidden=True),
) -> None:
    """Run the golden corpus and the property suites."""
    rows = run_selftest(name_filter, corpus or GOLDEN_DIR)
    if not rows:
        console.print(f"[red]Error: no selftest rows match '{escape(name_filter or '')}'[/red]")
        raise typer.Exit(EXIT_INPUT_ERROR)

    table = Table(title="Selftest", border_style="cyan")
    table.add_column("Row", style="bold")
    table.add_column("Result")
    table.add_column("Detail")
    for row in rows:
        result = "[green]pass[/green]" if row.passed else "[red]FAIL[/red]"
        table.add_row(escape(row.name), result, escape(row.detail))
    console.print(table)

    failed = [row.name for row in rows if not row.passed]
    if failed:
        console.print(f"[red]{len(failed)} of {len(rows)} row(s) failed: {escape(', '.join(failed))}[/red]")
        raise typer.Exit(EXIT_CHECK_FAILED)
    console.print(f"[green]All {len(rows)} row(s) passed.[/green]")


@app.command()
def validate(
    path: Path = typer.Argument(..., help="Problem file (.vicar)"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for the guard sample points"),
) -> None:
    """Validate a problem file: schema, expressions and box guards."""
    errors = validate_problem(path, _seed_override(seed))
    if errors:
        _print_errors(errors)
        raise typer.Exit(EXIT_INPUT_ERROR)
    console.print("[green]Problem file is valid.[/green]")


@app.command()
def init(
    path: Path = typer.Argument(..., help="Where to write the new problem file"),
    example: Optional[str] = typer.Option(None, "--example", "-e", help="Copy a bundled golden problem"),
) -> None:
    """Write a starter problem file."""
    if path.exists():
        console.print(f"[yellow]{escape(str(path))} already exists[/yellow]")
        raise typer.Exit(EXIT_INPUT_ERROR)

    if example:
        available = {case.name: case.problem_path for case in discover(GOLDEN_DIR)}
        source = available.get(example) or available.get(example.replace("_", "-"))
        if source is None:
            console.print(
                f"[red]Example '{escape(example)}' not found. "
                f"Available: {', '.join(sorted(available))}[/red]"
            )
            raise typer.Exit(EXIT_INPUT_ERROR)
        shutil.copyfile(source, path)
    else:
        path.write_text(yaml.dump(TEMPLATE, default_flow_style=None, sort_keys=False))

    console.print(f"[green]Problem file written to {escape(str(path))}[/green]")
    console.print(f"[dim]Next: run 'vicar analyze {escape(str(path))}'[/dim]")


@app.command()
def schema(
    out: Optional[Path] = typer.Option(
        None, "--out", "-o", help="Write the schema here instead of printing it"
    ),
) -> None:
    """Print the JSON schema of the analysis report."""
    text = report_schema()
    if out is not None:
        out.write_text(text)
        console.print(f"[green]Schema written to {escape(str(out))}[/green]")
        return
    typer.echo(text, nl=False)
