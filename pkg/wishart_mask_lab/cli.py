"""Command-line interface: census, moments, verify, sweep and kappa."""

import logging
import math
import sys
from pathlib import Path
from typing import cast

import numpy as np
import typer
from rich.console import Console
from rich.logging import RichHandler

from wishart_mask_lab import __version__
from wishart_mask_lab.census import census as compute_census
from wishart_mask_lab.config import config
from wishart_mask_lab.ensembles import Ensemble, WishartMethod, sample_masked
from wishart_mask_lab.experiments import (
    SWEEP_FAMILIES,
    TESTS,
    DistinguishingTest,
    SweepConfig,
    convergence_report,
    phase_sweep,
    resolve_threads,
    simulate_statistics,
)
from wishart_mask_lab.export import ExportFormat, ReportExporter
from wishart_mask_lab.graphs import Graph, GraphError, parse_graph_spec
from wishart_mask_lab.models import (
    CensusDocument,
    EmpiricalMoments,
    GraphSummary,
    Kappa4Model,
    KappaDocument,
    MomentReport,
    MomentsDocument,
    PredictedMoments,
    RunMetadata,
    SweepDocument,
    VerdictModel,
    VerificationDocument,
)
from wishart_mask_lab.moments import (
    MeanKind,
    MomentPrediction,
    VarianceKind,
    predicted_moments,
)
from wishart_mask_lab.seeding import MASK64, Stream, trial_rng
from wishart_mask_lab.statistics import (
    InapplicableStatisticError,
    Statistic,
    kappa3,
    kappa4,
    kappa_r,
    kappa_r_law,
)
from wishart_mask_lab.verification import SUITE_NAMES, run_suite

logger = logging.getLogger(__name__)

err_console = Console(stderr=True)

CLOSED_FORM_STATISTICS = (
    Statistic.KAPPA3,
    Statistic.KAPPA4,
    Statistic.KAPPA4_C4,
    Statistic.KAPPA4_P2,
    Statistic.KAPPA4_E,
)


def configure_logging(level: str | None) -> None:
    """Route log records to stderr through rich; stdout carries payloads only."""
    name = (level or config.logging.level).upper()
    if name not in logging.getLevelNamesMapping():
        raise typer.BadParameter(f"Unknown log level {level!r}", param_hint="--log-level")
    handler = RichHandler(
        console=err_console,
        rich_tracebacks=config.logging.rich_tracebacks,
        show_path=False,
    )
    logging.basicConfig(level=name, format=config.logging.format, handlers=[handler], force=True)


def _exporter() -> ReportExporter:
    return ReportExporter(config.output.significant_digits, config.output.json_indent)


def _metadata(command: str, seed: int | None) -> RunMetadata:
    return RunMetadata(version=__version__, command=command, argv=list(sys.argv), seed=seed)


def _resolve_seed(seed: int | None) -> int:
    seed = config.experiment.seed if seed is None else seed
    if not 0 <= seed <= MASK64:
        raise typer.BadParameter(f"Seed must be an unsigned 64-bit integer, got {seed}", param_hint="--seed")
    return seed


def _load_graph(spec: str, seed: int) -> Graph:
    try:
        return parse_graph_spec(spec, trial_rng(seed, Stream.MASK, 0))
    except GraphError as e:
        raise typer.BadParameter(str(e), param_hint="--graph") from e


def _parse_ensemble(value: str) -> Ensemble:
    try:
        return Ensemble(value.lower())
    except ValueError as e:
        raise typer.BadParameter(f"Unknown ensemble {value!r}", param_hint="--ensemble") from e


def _check_d(ensemble: Ensemble, d: int | None) -> None:
    if d is not None and d < 1:
        raise typer.BadParameter(f"Degrees of freedom must be positive, got {d}", param_hint="--d")
    if ensemble == Ensemble.WISHART and d is None:
        raise typer.BadParameter("The Wishart ensemble needs --d", param_hint="--d")


def _parse_grid(text: str, cast: type, hint: str) -> tuple:
    try:
        values = tuple(cast(token) for token in text.split(",") if token.strip())
    except ValueError as e:
        raise typer.BadParameter(f"Malformed grid {text!r}", param_hint=hint) from e
    if not values:
        raise typer.BadParameter("Grid must be nonempty", param_hint=hint)
    return values


def census_impl(
    graph_spec: str,
    d: int | None,
    seed: int,
    threads: int,
    out: Path | None,
    output_format: ExportFormat = "json",
) -> None:
    """Implementation for the census command."""
    graph = _load_graph(graph_spec, seed)
    counts = compute_census(graph, threads=threads)
    report = convergence_report(graph, d) if d is not None else None
    document = CensusDocument.build(
        _metadata("census", seed), GraphSummary.from_graph(graph_spec, graph), counts, report
    )
    _exporter().write(_exporter().render(document, output_format), out)


def _predict(graph: Graph, d: int | None, statistic: Statistic, ensemble: Ensemble) -> MomentPrediction:
    if statistic != Statistic.KAPPA_R:
        return predicted_moments(graph, d, statistic, ensemble)
    law = kappa_r_law(graph, d, ensemble)
    return MomentPrediction(
        statistic, ensemble, d, law.mean, MeanKind.EXACT, law.variance, VarianceKind.EXACT
    )


def _z(empirical: float, predicted: float, stderr: float) -> float | None:
    return (empirical - predicted) / stderr if stderr > 0 else None


def moments_impl(
    graph_spec: str,
    ensemble: Ensemble,
    d: int | None,
    trials: int,
    seed: int,
    statistics: tuple[Statistic, ...],
    threads: int | None,
    method: WishartMethod,
    out: Path | None,
    output_format: ExportFormat = "json",
) -> None:
    """Implementation for the moments command."""
    graph = _load_graph(graph_spec, seed)
    try:
        predictions = [_predict(graph, d, s, ensemble) for s in statistics]
        samples = simulate_statistics(
            graph, ensemble, d, trials, seed, statistics, threads=threads, method=method
        )
    except InapplicableStatisticError as e:
        raise typer.BadParameter(str(e), param_hint="--statistic") from e

    reports = []
    for prediction in predictions:
        values = samples[prediction.statistic]
        mean = float(np.mean(values))
        var = float(np.var(values, ddof=1)) if trials > 1 else 0.0
        stderr = math.sqrt(var / trials)
        centered = values - mean
        fourth = float(np.mean(centered**4))
        var_stderr = math.sqrt(max(fourth - float(np.mean(centered**2)) ** 2, 0.0) / trials)
        reports.append(
            MomentReport(
                statistic=str(prediction.statistic),
                predicted=PredictedMoments.from_prediction(prediction),
                empirical=EmpiricalMoments(mean=mean, var=var, stderr=stderr, var_stderr=var_stderr),
                z_scores={
                    "mean": _z(mean, prediction.mean, stderr),
                    "variance": _z(var, prediction.variance, var_stderr),
                },
            )
        )
    document = MomentsDocument(
        metadata=_metadata("moments", seed),
        graph=GraphSummary.from_graph(graph_spec, graph),
        ensemble=str(ensemble),
        d=d,
        n_trials=trials,
        reports=reports,
    )
    _exporter().write(_exporter().render(document, output_format), out)


def verify_impl(
    suite: str, trials: int, seed: int, out: Path | None, output_format: ExportFormat = "json"
) -> bool:
    """Implementation for the verify command; returns whether every check passed."""
    if suite not in SUITE_NAMES:
        raise typer.BadParameter(
            f"Unknown suite {suite!r}; expected one of {', '.join(SUITE_NAMES)}",
            param_hint="--suite",
        )
    if trials < config.verification.min_trials:
        raise typer.BadParameter(
            f"Verification needs at least {config.verification.min_trials} trials",
            param_hint="--trials",
        )
    report = run_suite(suite, trials, seed)
    document = VerificationDocument.from_report(_metadata("verify", seed), report)
    _exporter().write(_exporter().render(document, output_format), out)
    for check in report.checks:
        status = "[green]ok[/green]" if check.passed else "[red]FAIL[/red]"
        z = "" if check.z is None else f" z={check.z:+.2f}"
        err_console.print(
            f"{status} {check.name}: predicted={check.predicted:.6g} empirical={check.empirical:.6g}{z}"
        )
    return report.passed


def sweep_impl(
    sweep: SweepConfig,
    threads: int | None,
    method: WishartMethod,
    out: Path | None,
    output_format: ExportFormat,
    emit_gnuplot: bool,
) -> None:
    """Implementation for the sweep command."""
    rows = phase_sweep(sweep, threads=threads, method=method)
    exporter = _exporter()
    metadata = _metadata("sweep", sweep.base_seed)
    content = exporter.render(SweepDocument.build(metadata, rows), output_format)
    exporter.write(content, out)
    if emit_gnuplot and out is not None:
        exporter.write(exporter.gnuplot_script(out, rows), out.with_suffix(".gp"))


def kappa_impl(
    graph_spec: str,
    ensemble: Ensemble,
    d: int | None,
    seed: int,
    method: WishartMethod,
    out: Path | None,
    threads: int = 1,
    output_format: ExportFormat = "json",
) -> None:
    """Implementation for the kappa command: one sample, its statistics and verdicts."""
    graph = _load_graph(graph_spec, seed)
    stream = Stream.GOE if ensemble == Ensemble.GOE else Stream.WISHART
    matrix = sample_masked(graph, ensemble, d, trial_rng(seed, stream, 0), method=method)
    try:
        longest_row: float | None = kappa_r(matrix)
    except InapplicableStatisticError:
        longest_row = None
    verdicts = {}
    if d is not None:
        counts = compute_census(graph, threads=threads)
        verdicts = {
            str(test): VerdictModel.from_verdict(run(matrix, d, counts=counts))
            for test, run in TESTS.items()
        }
    document = KappaDocument(
        metadata=_metadata("kappa", seed),
        graph=GraphSummary.from_graph(graph_spec, graph),
        ensemble=str(ensemble),
        d=d,
        kappa3=kappa3(matrix),
        kappa4=Kappa4Model.from_breakdown(kappa4(matrix)),
        kappa_r=longest_row,
        verdicts=verdicts,
    )
    _exporter().write(_exporter().render(document, output_format), out)


GRAPH_HELP = "Graph spec, e.g. er:n=40,p=0.3 or kbip:n=2,m=4"
SEED_HELP = "Base seed (default from WML_SEED or pyproject)"
FORMAT_HELP = "json or csv"
THREADS_HELP = "Worker threads (default: all cores)"


def _parse_format(value: str) -> ExportFormat:
    if value not in ("json", "csv"):
        raise typer.BadParameter(f"Unknown format {value!r}", param_hint="--format")
    return cast(ExportFormat, value)


def census(
    graph: str = typer.Option(..., "--graph", help=GRAPH_HELP),
    d: int | None = typer.Option(None, "--d", help="Also report hypothesis ratios at d"),
    seed: int | None = typer.Option(None, "--seed", help=SEED_HELP),
    threads: int | None = typer.Option(None, "--threads", help=THREADS_HELP),
    out: Path | None = typer.Option(None, "--out", help="Output path (stdout if omitted)"),
    output_format: str = typer.Option("json", "--format", help=FORMAT_HELP),
    log_level: str | None = typer.Option(None, "--log-level", help="Log level"),
) -> None:
    """Count every census pattern in a mask graph."""
    configure_logging(log_level)
    if d is not None and d < 1:
        raise typer.BadParameter(f"Degrees of freedom must be positive, got {d}", param_hint="--d")
    census_impl(
        graph, d, _resolve_seed(seed), resolve_threads(threads), out, _parse_format(output_format)
    )


def moments(
    graph: str = typer.Option(..., "--graph", help=GRAPH_HELP),
    ensemble: str = typer.Option("wishart", "--ensemble", help="wishart or goe"),
    d: int | None = typer.Option(None, "--d", help="Degrees of freedom"),
    trials: int | None = typer.Option(None, "--trials", help="Monte Carlo trials"),
    seed: int | None = typer.Option(None, "--seed", help=SEED_HELP),
    statistic: list[str] | None = typer.Option(
        None, "--statistic", help="Statistic to report (repeatable)"
    ),
    threads: int | None = typer.Option(None, "--threads", help=THREADS_HELP),
    method: str | None = typer.Option(None, "--method", help="latent or bartlett"),
    out: Path | None = typer.Option(None, "--out", help="Output path (stdout if omitted)"),
    output_format: str = typer.Option("json", "--format", help=FORMAT_HELP),
    log_level: str | None = typer.Option(None, "--log-level", help="Log level"),
) -> None:
    """Compare predicted and simulated moments of the statistics."""
    configure_logging(log_level)
    chosen = _parse_ensemble(ensemble)
    _check_d(chosen, d)
    try:
        statistics = tuple(Statistic(s) for s in statistic) if statistic else CLOSED_FORM_STATISTICS
    except ValueError as e:
        raise typer.BadParameter(str(e), param_hint="--statistic") from e
    trial_count = trials or config.experiment.trials
    if trial_count < 1:
        raise typer.BadParameter("Need at least one trial", param_hint="--trials")
    moments_impl(
        graph,
        chosen,
        d,
        trial_count,
        _resolve_seed(seed),
        statistics,
        resolve_threads(threads),
        _parse_method(method),
        out,
        _parse_format(output_format),
    )


def verify(
    suite: str = typer.Option(..., "--suite", help=f"One of {', '.join(SUITE_NAMES)}"),
    trials: int | None = typer.Option(None, "--trials", help="Draws per check"),
    seed: int | None = typer.Option(None, "--seed", help=SEED_HELP),
    out: Path | None = typer.Option(None, "--out", help="Output path (stdout if omitted)"),
    output_format: str = typer.Option("json", "--format", help=FORMAT_HELP),
    log_level: str | None = typer.Option(None, "--log-level", help="Log level"),
) -> None:
    """Run a bundled verification suite; exits 1 when any check fails."""
    configure_logging(log_level)
    passed = verify_impl(
        suite,
        trials or config.verification.trials,
        _resolve_seed(seed),
        out,
        _parse_format(output_format),
    )
    if not passed:
        err_console.print(f"[red]Suite {suite} failed[/red]")
        raise typer.Exit(code=1)


def sweep(
    family: str = typer.Option("er", "--family", help=f"One of {', '.join(SWEEP_FAMILIES)}"),
    n: int = typer.Option(..., "--n", help="Vertex count (left side for bipartite families)"),
    m: int | None = typer.Option(None, "--m", help="Right side size for bipartite families"),
    p_grid: str = typer.Option("1.0", "--p-grid", help="Comma-separated edge probabilities"),
    d_grid: str = typer.Option(..., "--d-grid", help="Comma-separated degrees of freedom"),
    test: str = typer.Option("deg4", "--test", help="deg3, deg4 or maxdeg"),
    trials: int | None = typer.Option(None, "--trials", help="Trials per hypothesis"),
    seed: int | None = typer.Option(None, "--seed", help=SEED_HELP),
    threads: int | None = typer.Option(None, "--threads", help=THREADS_HELP),
    method: str | None = typer.Option(None, "--method", help="latent or bartlett"),
    out: Path | None = typer.Option(None, "--out", help="Output path (stdout if omitted)"),
    output_format: str = typer.Option("csv", "--format", help=FORMAT_HELP),
    emit_gnuplot: bool = typer.Option(
        False, "--emit-gnuplot", help="Write a gnuplot script next to --out"
    ),
    log_level: str | None = typer.Option(None, "--log-level", help="Log level"),
) -> None:
    """Estimate test errors over a (p, d) grid."""
    configure_logging(log_level)
    chosen_format = _parse_format(output_format)
    if emit_gnuplot and out is None:
        raise typer.BadParameter("--emit-gnuplot needs --out", param_hint="--emit-gnuplot")
    try:
        config_ = SweepConfig(
            family=family,  # type: ignore[arg-type]
            n=n,
            m=m,
            p_grid=_parse_grid(p_grid, float, "--p-grid"),
            d_grid=_parse_grid(d_grid, int, "--d-grid"),
            test=DistinguishingTest(test),
            trials=trials or config.experiment.trials,
            base_seed=_resolve_seed(seed),
        )
    except ValueError as e:
        raise typer.BadParameter(str(e)) from e
    sweep_impl(
        config_,
        resolve_threads(threads),
        _parse_method(method),
        out,
        chosen_format,
        emit_gnuplot,
    )


def kappa(
    graph: str = typer.Option(..., "--graph", help=GRAPH_HELP),
    ensemble: str = typer.Option("wishart", "--ensemble", help="wishart or goe"),
    d: int | None = typer.Option(None, "--d", help="Degrees of freedom"),
    seed: int | None = typer.Option(None, "--seed", help=SEED_HELP),
    method: str | None = typer.Option(None, "--method", help="latent or bartlett"),
    threads: int | None = typer.Option(None, "--threads", help=THREADS_HELP),
    out: Path | None = typer.Option(None, "--out", help="Output path (stdout if omitted)"),
    output_format: str = typer.Option("json", "--format", help=FORMAT_HELP),
    log_level: str | None = typer.Option(None, "--log-level", help="Log level"),
) -> None:
    """Draw one sample and report kappa3, kappa4, kappa_r and the test verdicts."""
    configure_logging(log_level)
    chosen = _parse_ensemble(ensemble)
    _check_d(chosen, d)
    kappa_impl(
        graph,
        chosen,
        d,
        _resolve_seed(seed),
        _parse_method(method),
        out,
        resolve_threads(threads),
        _parse_format(output_format),
    )


def _parse_method(method: str | None) -> WishartMethod:
    value = (method or config.sampling.wishart_method).lower()
    if value not in ("latent", "bartlett"):
        raise typer.BadParameter(f"Unknown Wishart method {method!r}", param_hint="--method")
    return value  # type: ignore[return-value]


app = typer.Typer(help="Masked Wishart vs GOE experiments.", no_args_is_help=True)
app.command()(census)
app.command()(moments)
app.command()(verify)
app.command()(sweep)
app.command()(kappa)

if __name__ == "__main__":
    app()
