"""markov-embed - embeddability analysis of Markov matrices."""

import asyncio
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import NoReturn, Optional

import click
import structlog
import yaml
from pydantic import BaseModel, ValidationError

from markov_embed import __version__
from markov_embed.catalog import FIXTURES, get_fixture
from markov_embed.checks import runnenberg_data
from markov_embed.config import AnalysisConfig, Tolerances, load_config, settings
from markov_embed.errors import (
    EmbeddingError,
    InputFormatError,
    LinalgError,
    MatrixError,
    SearchError,
)
from markov_embed.io import FORMATS, MatrixFormat, format_matrix, infer_format, read_matrix
from markov_embed.linalg import as_real_matrix, eigen_decompose, expm, logm_principal, op_norm
from markov_embed.matrices import (
    GeneratorMatrix,
    StochasticMatrix,
    semigroup_at,
    validate_stochastic,
)
from markov_embed.models import (
    AnalysisReport,
    BatchFailure,
    BatchReport,
    CheckReport,
    CuthbertReport,
    GeneratorReport,
    InputReport,
    RegularizationReport,
    RunnenbergEntry,
    VerdictReport,
    matrix_payload,
)
from markov_embed.regularization import regularize
from markov_embed.search import (
    UniquenessCertificate,
    VerdictStatus,
    cuthbert_diagnostics,
    decide_embeddable,
    enumerate_branches,
    uniqueness_certificate,
)
from markov_embed.sweep import error_bound_sweep, soundness_sweep

logger = structlog.get_logger()

EXIT_CODES = {
    VerdictStatus.EMBEDDABLE: 0,
    VerdictStatus.NOT_EMBEDDABLE: 1,
    VerdictStatus.INCONCLUSIVE: 3,
}
EXIT_INPUT_ERROR = 2
EXIT_COMPUTATION_ERROR = 3

LOG_LEVELS = ("DEBUG", "INFO", "WARNING", "ERROR")


def configure_logging(log_level: str) -> None:
    """Structured logging to stderr; stdout carries only reports and matrices."""
    level = log_level.upper()
    logging.basicConfig(
        format="%(message)s",
        stream=sys.stderr,
        level=getattr(logging, level, logging.WARNING),
        force=True,
    )
    structlog.configure(
        processors=[
            structlog.stdlib.filter_by_level,
            structlog.stdlib.add_logger_name,
            structlog.stdlib.add_log_level,
            structlog.stdlib.PositionalArgumentsFormatter(),
            structlog.processors.TimeStamper(fmt="iso"),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            structlog.processors.UnicodeDecoder(),
            structlog.dev.ConsoleRenderer() if level == "DEBUG" else structlog.processors.JSONRenderer(),
        ],
        wrapper_class=structlog.stdlib.BoundLogger,
        context_class=dict,
        logger_factory=structlog.stdlib.LoggerFactory(),
        cache_logger_on_first_use=True,
    )


@dataclass
class CliState:
    config: AnalysisConfig
    quiet: bool = False


class GeneratorListing(BaseModel):
    """Output of the generators command in JSON format."""
    schema_version: int = 1
    generators: list[GeneratorReport]


# Analysis pipeline

def _generator_report(
    A: StochasticMatrix,
    generator: GeneratorMatrix,
    tol: Tolerances,
    offsets: Optional[tuple[int, ...]] = None,
    principal: bool = True,
    sector_margins: tuple[float, ...] = (),
) -> GeneratorReport:
    cuthbert = None
    cuthbert_error = None
    try:
        cuthbert = CuthbertReport.from_diagnostics(cuthbert_diagnostics(A, generator, tol))
    except SearchError as e:
        cuthbert_error = f"{type(e).__name__}: {e}"

    return GeneratorReport(
        offsets=list(offsets) if offsets is not None else None,
        principal=principal,
        matrix=matrix_payload(generator.values),
        residual=op_norm(expm(generator.values) - A.values),
        sector_margins=list(sector_margins),
        cuthbert=cuthbert,
        cuthbert_error=cuthbert_error,
    )


def analyze_matrix(
    A: StochasticMatrix,
    config: AnalysisConfig,
    source: Optional[str] = None,
) -> AnalysisReport:
    """Validate, run the battery, decide, certify uniqueness and regularize."""
    tol, search = config.tolerances, config.search
    verdict = decide_embeddable(A, tol, search)

    try:
        spectrum = runnenberg_data(eigen_decompose(A.values, tol).eigenvalues, A.n)
    except LinalgError:
        spectrum = ()

    if isinstance(verdict.certificate, UniquenessCertificate):
        uniqueness = verdict.certificate
    else:
        try:
            uniqueness = uniqueness_certificate(A, tol)
        except EmbeddingError:
            uniqueness = UniquenessCertificate.UNKNOWN

    generators = [
        _generator_report(
            A,
            branch.generator,
            tol,
            offsets=branch.offsets,
            principal=branch.is_principal,
            sector_margins=branch.sector_margins,
        )
        for branch in verdict.generators
    ]
    if not generators and verdict.witness is not None:
        generators.append(_generator_report(A, verdict.witness, tol))

    regularization = None
    regularization_error = None
    if verdict.status != VerdictStatus.EMBEDDABLE:
        try:
            regularization = RegularizationReport.from_result(regularize(A, tol))
        except EmbeddingError as e:
            regularization_error = f"{type(e).__name__}: {e}"

    return AnalysisReport(
        input=InputReport(
            source=source,
            n=A.n,
            matrix=matrix_payload(A.values),
            row_repairs=list(A.row_repairs),
            max_repair=A.max_repair,
        ),
        spectrum=[RunnenbergEntry.from_datum(d) for d in spectrum],
        battery=[CheckReport.from_result(r) for r in verdict.battery],
        verdict=VerdictReport.from_verdict(verdict),
        uniqueness=uniqueness,
        generators=generators,
        regularization=regularization,
        regularization_error=regularization_error,
        tolerances=tol,
        search=search,
    )


def load_stochastic(path: Path, fmt: Optional[str], tol: Tolerances) -> StochasticMatrix:
    A = validate_stochastic(read_matrix(path, fmt), tol)
    if A.max_repair > 0:
        logger.info("Input repaired", path=str(path), max_repair=A.max_repair)
    return A


def _analyze_file(path: Path, fmt: Optional[str], config: AnalysisConfig) -> AnalysisReport:
    A = load_stochastic(path, fmt, config.tolerances)
    return analyze_matrix(A, config, source=path.name)


async def analyze_batch(
    paths: list[Path],
    fmt: Optional[str],
    config: AnalysisConfig,
) -> BatchReport:
    """Analyze matrix files concurrently; load failures are collected, not raised."""
    tasks = [asyncio.to_thread(_analyze_file, path, fmt, config) for path in paths]
    results = await asyncio.gather(*tasks, return_exceptions=True)

    reports: list[AnalysisReport] = []
    failures: list[BatchFailure] = []
    for path, result in zip(paths, results):
        if isinstance(result, EmbeddingError):
            logger.warning("Matrix file failed", path=str(path), error=str(result))
            failures.append(BatchFailure(source=path.name, error=f"{type(result).__name__}: {result}"))
        elif isinstance(result, BaseException):
            raise result
        else:
            reports.append(result)
    return BatchReport(reports=reports, failures=failures)


def batch_exit_code(batch: BatchReport) -> int:
    statuses = {report.verdict.status for report in batch.reports}
    if batch.failures:
        return EXIT_INPUT_ERROR
    if VerdictStatus.INCONCLUSIVE in statuses:
        return EXIT_CODES[VerdictStatus.INCONCLUSIVE]
    if VerdictStatus.NOT_EMBEDDABLE in statuses:
        return EXIT_CODES[VerdictStatus.NOT_EMBEDDABLE]
    return EXIT_CODES[VerdictStatus.EMBEDDABLE]


# Text rendering

def _g(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.12g}"


def _matrix_lines(matrix: list[list[Optional[float]]], indent: int) -> list[str]:
    return [" " * indent + "  ".join(f"{_g(x):>15}" for x in row) for row in matrix]


def render_text(report: AnalysisReport) -> str:
    """Human-readable report; every check shows its margin."""
    lines = [
        f"markov-embed {report.tool_version}",
        f"input: {report.input.source or '-'} (n={report.input.n}, "
        f"max row repair {_g(report.input.max_repair)})",
        "spectrum:",
    ]
    for entry in report.spectrum:
        z = entry.eigenvalue
        lines.append(
            f"  {_g(z.re)} {'+' if (z.im or 0) >= 0 else '-'} {_g(abs(z.im or 0.0))}i"
            f"  r={_g(entry.r)}  theta={_g(entry.theta)}"
            f"  bound={_g(entry.bound)}  margin={_g(entry.margin)}"
        )

    lines.append("battery:")
    for check in report.battery:
        state = "n/a" if not check.applicable else ("pass" if check.passed else "FAIL")
        lines.append(f"  {check.name:<28} {state:<4}  margin={_g(check.margin)}")

    verdict = report.verdict
    lines.append(f"verdict: {verdict.status.value}")
    if verdict.failed_check:
        lines.append(f"  certificate: failed check {verdict.failed_check}")
    elif verdict.certificate_kind == "exhausted_enumeration":
        lines.append(
            f"  certificate: {verdict.branches_examined} admissible branches, none a generator"
        )
    if verdict.reason:
        lines.append(f"  reason: {verdict.reason}")
    lines.append(f"uniqueness: {report.uniqueness.value}")

    if report.generators:
        lines.append(
            f"generators: {len(report.generators)} listed, "
            f"at least {verdict.generator_count_lower_bound}"
        )
        for generator in report.generators:
            label = "principal" if generator.principal else f"offsets {generator.offsets}"
            lines.append(f"  {label}  residual={_g(generator.residual)}")
            lines.extend(_matrix_lines(generator.matrix, indent=4))

    if report.regularization is not None:
        reg = report.regularization
        lines.extend([
            "regularization:",
            f"  epsilon           {_g(reg.epsilon)}",
            f"  exp_error_actual  {_g(reg.exp_error_actual)}",
            f"  exp_error_bound   {_g(reg.exp_error_bound)}",
            f"  loose_bound       {_g(reg.loose_bound)}",
            "  B:",
        ])
        lines.extend(_matrix_lines(reg.B, indent=4))
        lines.append("  exp(B):")
        lines.extend(_matrix_lines(reg.regularized, indent=4))
    elif report.regularization_error:
        lines.append(f"regularization: unavailable ({report.regularization_error})")
    return "\n".join(lines) + "\n"


# CLI helpers

def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        click.echo(text, nl=False)


def _fail(ctx: click.Context, error: Exception, code: int) -> NoReturn:
    click.echo(f"error: {error}", err=True)
    ctx.exit(code)


def _effective_config(
    state: CliState,
    tol_row_sum: Optional[float],
    tol_entry: Optional[float],
    tol_sector: Optional[float],
    max_offset: Optional[int],
) -> AnalysisConfig:
    """File configuration with command-line overrides applied."""
    tolerances = state.config.tolerances.model_dump()
    overrides = {"row_sum": tol_row_sum, "entry": tol_entry, "sector": tol_sector}
    tolerances.update({k: v for k, v in overrides.items() if v is not None})
    search = state.config.search.model_dump()
    if max_offset is not None:
        search["max_offset"] = max_offset
    try:
        return AnalysisConfig.model_validate({"tolerances": tolerances, "search": search})
    except ValidationError as e:
        raise click.UsageError(f"invalid tolerance or search option: {e.errors()[0]['msg']}")


def matrix_options(func):
    """Options shared by every command that reads a matrix."""
    options = [
        click.option("--format", "fmt", type=click.Choice(FORMATS), default=None,
                     help="Matrix format (default: from file extension)"),
        click.option("--tol-row-sum", type=float, default=None, help="Row sum tolerance"),
        click.option("--tol-entry", type=float, default=None, help="Negative entry tolerance"),
        click.option("--tol-sector", type=float, default=None, help="Sector boundary slack"),
        click.option("--max-offset", type=click.IntRange(min=0), default=None,
                     help="Cap on |k| in branch enumeration"),
        click.option("--output", "-o", type=click.Path(dir_okay=False), default=None,
                     help="Write to PATH instead of stdout"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _setup(
    ctx: click.Context,
    input_path: str,
    fmt: Optional[str],
    tol_row_sum: Optional[float],
    tol_entry: Optional[float],
    tol_sector: Optional[float],
    max_offset: Optional[int],
) -> tuple[AnalysisConfig, StochasticMatrix, MatrixFormat]:
    config = _effective_config(ctx.obj, tol_row_sum, tol_entry, tol_sector, max_offset)
    try:
        out_format = infer_format(input_path, fmt)
        A = load_stochastic(Path(input_path), fmt, config.tolerances)
    except (InputFormatError, MatrixError) as e:
        _fail(ctx, e, EXIT_INPUT_ERROR)
    return config, A, out_format


# Commands

@click.group()
@click.version_option(version=__version__, prog_name="markov-embed")
@click.option("--log-level", type=click.Choice(LOG_LEVELS, case_sensitive=False),
              default=settings.log_level, show_default=True, help="Logging level")
@click.option("--quiet", is_flag=True, help="Only log errors")
@click.option("--config", "config_path", type=click.Path(dir_okay=False),
              default=settings.config_path, show_default=True, help="YAML configuration file")
@click.pass_context
def cli(ctx: click.Context, log_level: str, quiet: bool, config_path: str):
    """
    Embeddability analysis of Markov matrices.

    Decides whether a stochastic matrix A is exp(B) for a Markov generator
    B, lists the generators, and finds the closest generator otherwise.
    """
    configure_logging("ERROR" if quiet else log_level)
    try:
        config = load_config(config_path)
    except (yaml.YAMLError, ValidationError) as e:
        raise click.UsageError(f"invalid configuration file {config_path}: {e}")
    ctx.obj = CliState(config=config, quiet=quiet)


@cli.command()
@click.argument("input_path", metavar="INPUT", type=click.Path(exists=True))
@matrix_options
@click.option("--report", "report_format", type=click.Choice(["text", "json"]),
              default="text", show_default=True, help="Report format")
@click.pass_context
def analyze(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector, max_offset, output,
            report_format):
    """
    Full embeddability report for INPUT.

    INPUT is a matrix file or a directory of *.csv/*.json files. Exit code
    0 embeddable, 1 not embeddable, 2 unreadable input, 3 inconclusive.
    """
    path = Path(input_path)
    if path.is_dir():
        config = _effective_config(ctx.obj, tol_row_sum, tol_entry, tol_sector, max_offset)
        paths = sorted(p for p in path.iterdir() if p.suffix.lower() in (".csv", ".json"))
        if not paths:
            _fail(ctx, InputFormatError(f"no matrix files in {path}"), EXIT_INPUT_ERROR)
        batch = asyncio.run(analyze_batch(paths, fmt, config))
        if report_format == "json":
            _emit(batch.model_dump_json(indent=2) + "\n", output)
        else:
            text = "".join(render_text(r) + "\n" for r in batch.reports)
            text += "".join(f"failed: {f.source}: {f.error}\n" for f in batch.failures)
            _emit(text, output)
        ctx.exit(batch_exit_code(batch))

    config, A, _ = _setup(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector, max_offset)
    report = analyze_matrix(A, config, source=path.name)
    if report_format == "json":
        _emit(report.model_dump_json(indent=2) + "\n", output)
    else:
        _emit(render_text(report), output)
    ctx.exit(EXIT_CODES[report.verdict.status])


@cli.command()
@click.argument("input_path", metavar="INPUT", type=click.Path(exists=True, dir_okay=False))
@matrix_options
@click.pass_context
def logm(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector, max_offset, output):
    """Principal logarithm of the Markov matrix in INPUT."""
    config, A, out_format = _setup(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector,
                                   max_offset)
    try:
        L = logm_principal(A.values, config.tolerances)
    except LinalgError as e:
        _fail(ctx, e, EXIT_COMPUTATION_ERROR)
    _emit(format_matrix(L, out_format), output)


@cli.command("expm")
@click.argument("input_path", metavar="INPUT", type=click.Path(exists=True, dir_okay=False))
@matrix_options
@click.pass_context
def expm_command(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector, max_offset, output):
    """Matrix exponential of the real square matrix in INPUT."""
    try:
        out_format = infer_format(input_path, fmt)
        M = as_real_matrix(read_matrix(input_path, fmt))
    except (InputFormatError, MatrixError) as e:
        _fail(ctx, e, EXIT_INPUT_ERROR)
    try:
        E = expm(M)
    except LinalgError as e:
        _fail(ctx, e, EXIT_COMPUTATION_ERROR)
    _emit(format_matrix(E, out_format), output)


@cli.command("regularize")
@click.argument("input_path", metavar="INPUT", type=click.Path(exists=True, dir_okay=False))
@matrix_options
@click.pass_context
def regularize_command(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector, max_offset,
                       output):
    """Closest generator to the principal logarithm of INPUT (diagonal adjustment)."""
    config, A, out_format = _setup(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector,
                                   max_offset)
    try:
        result = regularize(A, config.tolerances)
    except EmbeddingError as e:
        _fail(ctx, e, EXIT_COMPUTATION_ERROR)
    if not ctx.obj.quiet:
        click.echo(
            f"epsilon={_g(result.epsilon)} exp_error_actual={_g(result.exp_error_actual)} "
            f"exp_error_bound={_g(result.exp_error_bound)}",
            err=True,
        )
    _emit(format_matrix(result.B.values, out_format), output)


@cli.command()
@click.argument("input_path", metavar="INPUT", type=click.Path(exists=True, dir_okay=False))
@matrix_options
@click.pass_context
def generators(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector, max_offset, output):
    """
    Every Markov generator of INPUT found by branch enumeration.

    Exit code 0 if at least one exists, 1 if none, 3 if the enumeration is
    impossible (repeated or zero eigenvalues) or would exceed its limits.
    """
    config, A, out_format = _setup(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector,
                                   max_offset)
    try:
        branches = enumerate_branches(A, config.tolerances, config.search)
    except (SearchError, LinalgError) as e:
        _fail(ctx, e, EXIT_COMPUTATION_ERROR)

    found = [b for b in branches if b.is_generator]
    if out_format == "json":
        listing = GeneratorListing(generators=[
            _generator_report(A, b.generator, config.tolerances, b.offsets, b.is_principal,
                              b.sector_margins)
            for b in found
        ])
        _emit(listing.model_dump_json(indent=2) + "\n", output)
    else:
        _emit(
            "\n".join(
                f"# offsets {' '.join(str(k) for k in b.offsets)}\n"
                + format_matrix(b.generator.values, "csv")
                for b in found
            ),
            output,
        )
    ctx.exit(0 if found else 1)


@cli.command()
@click.argument("input_path", metavar="INPUT", type=click.Path(exists=True, dir_okay=False))
@matrix_options
@click.option("--time", "t", type=click.FloatRange(min=0.0), required=True,
              help="Time at which to evaluate exp(B t)")
@click.pass_context
def interpolate(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector, max_offset, output, t):
    """
    Transition matrix exp(B t) for another time interval.

    B is the generator witness when INPUT is embeddable, otherwise the
    regularized generator.
    """
    config, A, out_format = _setup(ctx, input_path, fmt, tol_row_sum, tol_entry, tol_sector,
                                   max_offset)
    verdict = decide_embeddable(A, config.tolerances, config.search)
    generator = verdict.witness
    if generator is None:
        try:
            generator = regularize(A, config.tolerances).B
        except EmbeddingError as e:
            _fail(ctx, e, EXIT_COMPUTATION_ERROR)
        logger.info("Interpolating with regularized generator", status=verdict.status.value)

    try:
        P = semigroup_at(generator, t, config.tolerances)
    except EmbeddingError as e:
        _fail(ctx, e, EXIT_COMPUTATION_ERROR)
    _emit(format_matrix(P.values, out_format), output)


@cli.command()
@click.argument("name", type=click.Choice(list(FIXTURES), case_sensitive=False))
@click.option("--s", "s", type=float, default=0.0, show_default=True,
              help="Parameter of the l-s family")
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="csv", show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@click.pass_context
def fixture(ctx, name, s, fmt, output):
    """Write a catalog matrix with known embeddability behaviour."""
    try:
        A = get_fixture(name, s)
    except MatrixError as e:
        _fail(ctx, e, EXIT_INPUT_ERROR)
    _emit(format_matrix(A.values, fmt), output)


@cli.command()
@click.option("--count", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.pass_context
def selftest(ctx, count, seed):
    """Soundness sweep on seeded random generators; exit 0 iff every rate is 100%."""
    tol, search = ctx.obj.config.tolerances, ctx.obj.config.search
    sweep = soundness_sweep(count, seed, tol, search)
    bound = error_bound_sweep(count, seed, tol=tol)

    click.echo(f"generators:            {sweep.count}")
    click.echo(f"battery pass rate:     {sweep.battery_rate:.2%} of {sweep.battery_checked}")
    click.echo(f"embeddable rate:       {sweep.embeddable_rate:.2%} of {sweep.distinct}")
    click.echo(f"max round-trip error:  {sweep.max_round_trip:.3g}")
    click.echo(
        f"error bound:           {bound.violations} violations in "
        f"{bound.count - bound.skipped} regularized ({bound.regularized} with eps > 0)"
    )
    if bound.regularized:
        click.echo(f"tightest bound/actual: {bound.tightest_ratio:.3g}")
    for failure in sweep.failures:
        click.echo(f"failure: {failure}", err=True)
    ctx.exit(0 if sweep.ok and bound.violations == 0 else 1)


def main() -> None:
    cli(prog_name="markov-embed")


if __name__ == "__main__":
    main()
