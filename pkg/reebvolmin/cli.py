#!/usr/bin/env python3
"""Command line interface: one subcommand per pipeline stage plus ``analyze``."""

import logging
from collections.abc import Callable
from enum import StrEnum
from pathlib import Path
from typing import Any, NoReturn

import typer
from rich.console import Console
from rich.logging import RichHandler
from rich.panel import Panel
from rich.table import Table

from reebvolmin.charges import charge_spectrum, heat_trace_volume, reference_volume_ratio
from reebvolmin.cones import detect_height, drop_redundant, is_good, reduce_diagram
from reebvolmin.config import Config, load_config
from reebvolmin.dfutaki import (
    DFResult,
    donaldson_futaki,
    fit_polynomials,
    ksemistable_verdict,
    toric_product_config,
)
from reebvolmin.errors import InputError, NoHeightError, ReebVolminError
from reebvolmin.models import load_diagram, read_document, to_polytope_action, to_samples
from reebvolmin.obstructions import BrieskornExponents, ObstructionReport, WeightedHypersurface, brieskorn_tests, hypersurface_tests
from reebvolmin.report import AnalysisReport, ExitCode, emit_json, error_payload, exit_code_for, run_full_analysis
from reebvolmin.volmin import MinimizationResult, einstein_verdict, minimize
from reebvolmin.volume import ReebVector, truncate, vol_fn

HELP_GEOMETRY = "Geometry"
HELP_SPECTRUM = "Spectrum"
HELP_OBSTRUCTIONS = "Obstructions"
HELP_PIPELINE = "Pipeline"

app = typer.Typer(
    help="Sasaki-Einstein Reeb vectors of toric diagrams",
    no_args_is_help=True,
    context_settings={"help_option_names": ["-h", "--help"]},
)
console = Console()
logger = logging.getLogger(__name__)


class OutputFormat(StrEnum):
    """Output formats."""

    json = "json"
    pretty = "pretty"


# =============================================================================
# Shared options
# =============================================================================

_INPUT_ARG: Path = typer.Argument(..., help="Diagram or polygon JSON file, or - for stdin")
_JSON_OPT: bool = typer.Option(True, "--json/--pretty", help="Emit JSON (default) or rich tables")
_EXACT_OPT: bool = typer.Option(True, "--exact/--float", help="Exact rational or floating point arithmetic")
_REEB_OPT: str | None = typer.Option(None, "--reeb", help="Reeb vector, comma separated, rationals as p/q")
_TOLERANCE_OPT: float | None = typer.Option(
    None, "--tolerance", help="Relative slice-gradient tolerance (overrides REEBVOLMIN_TOLERANCE)"
)
_CUTOFF_OPT: float | None = typer.Option(None, "--cutoff", help="Charge cutoff R")
_DROP_OPT: bool = typer.Option(False, "--drop-redundant", help="Remove redundant normals before checking")


def _format(as_json: bool) -> OutputFormat:
    return OutputFormat.json if as_json else OutputFormat.pretty


def _config(ctx: typer.Context) -> Config:
    if isinstance(ctx.obj, Config):
        return ctx.obj
    return load_config()


def _fail(exc: ReebVolminError, output: OutputFormat) -> NoReturn:
    """Report an error and exit with its code."""
    if output == OutputFormat.json:
        typer.echo(emit_json(error_payload(exc)))
    else:
        console.print(f"[red]{type(exc).__name__}: {exc}[/red]")
    raise typer.Exit(int(exit_code_for(exc)))


def _run(output: OutputFormat, action: Callable[[], None]) -> None:
    try:
        action()
    except ReebVolminError as exc:
        _fail(exc, output)


def _parse_ints(text: str, name: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part.strip())
    except ValueError as exc:
        msg = f"--{name} must be a comma separated list of integers, got {text!r}"
        raise InputError(msg) from exc


def _emit(payload: Any) -> None:
    typer.echo(emit_json(payload))


# =============================================================================
# Display functions
# =============================================================================


def _display_goodness_rich(payload: dict[str, Any]) -> None:
    """Display a goodness report."""
    color = "green" if payload["verdict"] else "red"
    lines = [f"[bold {color}]{'good' if payload['verdict'] else 'not good'}[/bold {color}]"]
    if payload["failing_face"] is not None:
        lines.append(f"Failing face: {payload['failing_face']}")
    if payload["reason"]:
        lines.append(f"Reason: {payload['reason']}")
    lines.extend(f"[yellow]{w}[/yellow]" for w in payload["warnings"])
    console.print(Panel("\n".join(lines), title="Goodness", expand=False))


def _display_minimization_rich(result: MinimizationResult, admits: dict[str, Any] | None) -> None:
    """Display the minimizer in a table."""
    table = Table(title="Volume minimization", show_lines=True)
    table.add_column("Field", style="cyan")
    table.add_column("Value", style="green")
    table.add_row("xi_min", ", ".join(f"{x:.10f}" for x in result.xi_min.xi))
    table.add_row("S~", f"{result.s_tilde_min:.10g}")
    table.add_row("relative gradient", f"{result.grad_norm:.3e}")
    table.add_row("iterations", str(result.iterations))
    table.add_row("converged", str(result.converged))
    if admits is not None:
        table.add_row("admits at input", str(admits["admits"]))
    console.print(table)


def _display_spectrum_rich(payload: dict[str, Any]) -> None:
    """Display charges and multiplicities."""
    table = Table(title=f"Charges up to {payload['cutoff']}", show_lines=False)
    table.add_column("Charge", style="cyan")
    table.add_column("Multiplicity", style="yellow")
    for charge, mult in payload["entries"]:
        table.add_row(str(charge), str(mult))
    console.print(table)


def _display_obstruction_rich(report: ObstructionReport) -> None:
    """Display both obstruction tests."""
    table = Table(title="Obstructions (necessary conditions only)", show_lines=True)
    table.add_column("Test", style="cyan")
    table.add_column("Value", style="green")
    table.add_column("Pass", style="yellow")
    boundary = " (boundary)"
    table.add_row(
        "Lichnerowicz lambda1 >= 1",
        str(report.lambda1),
        f"{report.lichnerowicz_pass}{boundary if report.lichnerowicz_boundary else ''}",
    )
    table.add_row(
        "Bishop Vol/Vol(S) <= 1",
        str(report.vol_ratio),
        f"{report.bishop_pass}{boundary if report.bishop_boundary else ''}",
    )
    console.print(table)


def _display_df_rich(df: DFResult) -> None:
    """Display Donaldson-Futaki coefficients."""
    table = Table(title="Donaldson-Futaki invariant", show_lines=True)
    table.add_column("Coefficient", style="cyan")
    table.add_column("Value", style="green")
    for name in ("a0", "a1", "b0", "b1", "F0", "F1"):
        table.add_row(name, str(getattr(df, name)))
    table.add_row("verdict", str(ksemistable_verdict(df)))
    console.print(table)


def _display_report_rich(report: AnalysisReport) -> None:
    """Display a full analysis report."""
    _display_goodness_rich(report.goodness.to_json())
    if report.height is not None:
        console.print(f"[bold]Height[/bold] {report.height.ell}, covector {list(report.height.covector)}")
    if report.minimization is not None:
        admits = None if report.einstein is None else {"admits": report.einstein.admits}
        _display_minimization_rich(report.minimization, admits)
    if report.verdict is not None:
        console.print(Panel(f"[bold green]{report.verdict['statement']}[/bold green]", expand=False))
    for warning in report.warnings:
        console.print(f"[yellow]{warning}[/yellow]")


# =============================================================================
# Commands
# =============================================================================


@app.callback()
def main(
    ctx: typer.Context,
    verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at debug level"),
) -> None:
    """Sasaki-Einstein Reeb vectors of toric diagrams."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format="%(message)s",
        handlers=[RichHandler(console=Console(stderr=True), show_path=False)],
        force=True,
    )
    try:
        ctx.obj = load_config()
    except ReebVolminError as exc:
        _fail(exc, OutputFormat.json)


@app.command("check-good", rich_help_panel=HELP_GEOMETRY)
def check_good(
    source: Path = _INPUT_ARG,
    drop: bool = _DROP_OPT,
    as_json: bool = _JSON_OPT,
) -> None:
    """Check the goodness condition on every face of the cone."""
    output = _format(as_json)

    def _check() -> None:
        diagram, _polygon = load_diagram(source)
        if drop:
            diagram = drop_redundant(diagram)
        report = is_good(diagram)
        if output == OutputFormat.json:
            _emit({"diagram": diagram.to_json(), "goodness": report.to_json()})
        else:
            _display_goodness_rich(report.to_json())
        if not report.verdict:
            raise typer.Exit(int(ExitCode.not_good))

    _run(output, _check)


@app.command("normalize-height", rich_help_panel=HELP_GEOMETRY)
def normalize_height(
    source: Path = _INPUT_ARG,
    as_json: bool = _JSON_OPT,
) -> None:
    """Find the height and a unimodular transform putting every normal at first coordinate ell."""
    output = _format(as_json)

    def _normalize() -> None:
        diagram, _polygon = load_diagram(source)
        reduced, _changed = reduce_diagram(diagram)
        height = detect_height(reduced)
        if height is None:
            msg = "the diagram has no height"
            raise NoHeightError(msg)
        normalized = height.normalize(reduced)
        if output == OutputFormat.json:
            _emit({**height.to_json(), "normalized": normalized.to_json()})
        else:
            table = Table(title=f"Height {height.ell}", show_lines=True)
            table.add_column("Normal", style="cyan")
            table.add_column("Normalized", style="green")
            for before, after in zip(reduced.normals, normalized.normals, strict=True):
                table.add_row(str(list(before)), str(list(after)))
            console.print(table)

    _run(output, _normalize)


@app.command("volume", rich_help_panel=HELP_GEOMETRY)
def volume_command(
    source: Path = _INPUT_ARG,
    reeb: str = typer.Option(..., "--reeb", help="Reeb vector, comma separated, rationals as p/q"),
    exact: bool = _EXACT_OPT,
    as_json: bool = _JSON_OPT,
) -> None:
    """Volume of the truncated polytope and the normalized volume functional."""
    output = _format(as_json)

    def _volume() -> None:
        diagram, _polygon = load_diagram(source)
        xi = ReebVector.parse(reeb, exact=exact)
        value = vol_fn(diagram, xi)
        polytope = truncate(diagram, xi)
        if output == OutputFormat.json:
            _emit({"reeb": xi.to_json(), "volume": value.to_json(), "polytope": polytope.to_json()})
        else:
            table = Table(title="Reeb volume", show_lines=True)
            table.add_column("Quantity", style="cyan")
            table.add_column("Value", style="green")
            table.add_row("Vol(Delta)", str(value.vol_delta))
            table.add_row("S~", f"{value.s_tilde:.10g}")
            table.add_row("Vol(S, g)", f"{value.vol_riemannian:.10g}")
            table.add_row("vertices", str(len(polytope.vertices)))
            console.print(table)

    _run(output, _volume)


@app.command("minimize", rich_help_panel=HELP_GEOMETRY)
def minimize_command(
    ctx: typer.Context,
    source: Path = _INPUT_ARG,
    start: str | None = typer.Option(None, "--start", help="Starting Reeb vector on the slice"),
    reeb: str | None = _REEB_OPT,
    tolerance: float | None = _TOLERANCE_OPT,
    as_json: bool = _JSON_OPT,
) -> None:
    """Minimize the volume functional over the Reeb slice."""
    output = _format(as_json)
    config = _config(ctx).with_overrides(tolerance=tolerance)

    def _minimize() -> None:
        diagram, _polygon = load_diagram(source)
        start_xi = None if start is None else ReebVector.parse(start, exact=False)
        result = minimize(diagram, start_xi, tolerance=config.tolerance, max_iterations=config.max_iterations)
        admits = None
        if reeb is not None:
            verdict = einstein_verdict(
                diagram,
                ReebVector.parse(reeb),
                coordinate_tolerance=config.coordinate_tolerance,
                result=result,
            )
            admits = {"xi": verdict.xi.to_json()["xi"], "admits": verdict.admits}
        if output == OutputFormat.json:
            _emit({**result.to_json(), "admits_SE_at": admits})
        else:
            _display_minimization_rich(result, admits)
        if not result.converged:
            raise typer.Exit(int(ExitCode.not_converged))

    _run(output, _minimize)


@app.command("charges", rich_help_panel=HELP_SPECTRUM)
def charges_command(
    ctx: typer.Context,
    source: Path = _INPUT_ARG,
    reeb: str = typer.Option(..., "--reeb", help="Reeb vector, comma separated, rationals as p/q"),
    cutoff: float = typer.Option(..., "--cutoff", help="Charge cutoff R"),
    heat_trace: bool = typer.Option(False, "--heat-trace", help="Add the heat-trace volume estimate"),
    exact: bool = _EXACT_OPT,
    as_json: bool = _JSON_OPT,
) -> None:
    """Charge spectrum up to a cutoff, optionally with the heat-trace volume."""
    output = _format(as_json)
    config = _config(ctx)

    def _charges() -> None:
        diagram, _polygon = load_diagram(source)
        xi = ReebVector.parse(reeb, exact=exact)
        spectrum = charge_spectrum(diagram, xi, cutoff)
        payload: dict[str, Any] = {"reeb": xi.to_json(), "spectrum": spectrum.to_json()}
        if heat_trace:
            estimate = heat_trace_volume(diagram, xi, workers=config.threads)
            payload["heat_trace"] = estimate.to_json()
            payload["calibration"] = {
                "ratio": estimate.extrapolated / vol_fn(diagram, xi.as_float()).vol_riemannian,
                "reference": reference_volume_ratio(diagram.m),
                "empirical": True,
            }
        if output == OutputFormat.json:
            _emit(payload)
        else:
            _display_spectrum_rich(spectrum.to_json())
            if heat_trace:
                console.print(f"[bold]Heat-trace volume[/bold] {payload['heat_trace']['extrapolated']:.10g}")

    _run(output, _charges)


@app.command("obstruct", rich_help_panel=HELP_OBSTRUCTIONS)
def obstruct(
    weights: str | None = typer.Option(None, "--weights", help="Weights w, comma separated"),
    degree: int | None = typer.Option(None, "--degree", help="Degree d"),
    exponents: str | None = typer.Option(None, "--exponents", help="Brieskorn exponents, comma separated"),
    smooth: bool = typer.Option(True, "--smooth/--no-smooth", help="Record that the hypersurface is smooth off the origin"),
    as_json: bool = _JSON_OPT,
) -> None:
    """Lichnerowicz and Bishop tests for a weighted hypersurface or a Brieskorn polynomial."""
    output = _format(as_json)

    def _obstruct() -> None:
        if exponents is not None:
            brieskorn = BrieskornExponents(_parse_ints(exponents, "exponents"), smooth_claimed=smooth)
            report = brieskorn_tests(brieskorn)
            source: dict[str, Any] = brieskorn.to_json()
        elif weights is not None and degree is not None:
            w = _parse_ints(weights, "weights")
            hypersurface = WeightedHypersurface(m=len(w) - 2, weights=w, degree=degree, smooth_claimed=smooth)
            report = hypersurface_tests(hypersurface)
            source = hypersurface.to_json()
        else:
            msg = "give either --exponents or both --weights and --degree"
            raise InputError(msg)
        if output == OutputFormat.json:
            _emit({"input": source, "report": report.to_json()})
        else:
            _display_obstruction_rich(report)

    _run(output, _obstruct)


@app.command("dfutaki", rich_help_panel=HELP_OBSTRUCTIONS)
def dfutaki_command(
    ctx: typer.Context,
    samples: Path | None = typer.Option(None, "--samples", help="Samples JSON {n, samples: [[k, d_k, w_k], ...]}"),
    polytope: Path | None = typer.Option(None, "--polytope", help="Polytope JSON {vertices: [...]}"),
    alpha: str | None = typer.Option(None, "--alpha", help="Torus weight functional, comma separated"),
    k_max: int | None = typer.Option(None, "--k-max", help="Largest dilation for polytope samples"),
    as_json: bool = _JSON_OPT,
) -> None:
    """Donaldson-Futaki invariant from Hilbert samples or a product configuration."""
    output = _format(as_json)
    config = _config(ctx)

    def _dfutaki() -> None:
        if samples is not None:
            data = to_samples(read_document(samples))
        elif polytope is not None:
            document = read_document(polytope)
            if not isinstance(document, dict):
                raise InputError.at("", "expected a JSON object")
            if alpha is not None:
                document = {**document, "alpha": list(_parse_ints(alpha, "alpha"))}
            if "alpha" not in document:
                msg = "--polytope needs an alpha, either in the file or with --alpha"
                raise InputError(msg)
            cfg = to_polytope_action(document)
            data = toric_product_config(cfg, k_max or cfg.n + 4, workers=config.threads)
        else:
            msg = "give either --samples or --polytope"
            raise InputError(msg)
        df = donaldson_futaki(fit_polynomials(data))
        if output == OutputFormat.json:
            _emit({"samples": data.to_json(), "result": df.to_json(), "verdict": ksemistable_verdict(df)})
        else:
            _display_df_rich(df)

    _run(output, _dfutaki)


@app.command("analyze", rich_help_panel=HELP_PIPELINE)
def analyze(
    ctx: typer.Context,
    source: Path = _INPUT_ARG,
    reeb: str | None = _REEB_OPT,
    cutoff: float | None = _CUTOFF_OPT,
    heat_trace: bool = typer.Option(False, "--heat-trace", help="Cross-check the volume by the heat trace"),
    drop: bool = _DROP_OPT,
    tolerance: float | None = _TOLERANCE_OPT,
    as_json: bool = _JSON_OPT,
) -> None:
    """Run goodness, height, minimization and the optional charge cross-checks."""
    output = _format(as_json)
    config = _config(ctx).with_overrides(tolerance=tolerance)

    def _analyze() -> None:
        diagram, polygon = load_diagram(source)
        report = run_full_analysis(
            diagram,
            polygon=polygon,
            reeb=None if reeb is None else ReebVector.parse(reeb),
            config=config,
            drop=drop,
            cutoff=cutoff,
            heat_trace=heat_trace,
        )
        if output == OutputFormat.json:
            _emit(report.to_json())
        else:
            _display_report_rich(report)
        if report.exit_code != ExitCode.ok:
            raise typer.Exit(int(report.exit_code))

    _run(output, _analyze)


if __name__ == "__main__":
    app()
