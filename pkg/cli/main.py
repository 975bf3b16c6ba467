"""Command-line entry point.

Subcommands print a JSON document to stdout (or to ``--output``) and exit
with 0 when solved or satisfied, 1 when a criterion fails or a run does not
terminate, and 2 on malformed input, bad flags or bad configuration.
"""

import logging
import sys
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import click

from cli.commands import STATUS_OK
from cli.commands.check import check_tool
from cli.commands.simulate import simulate_parallel_tool
from cli.commands.solve import (
    solve_hamiltonian_tool,
    solve_hypergraph_tool,
    solve_ramsey_tool,
    solve_sat_tool,
    solve_transversal_tool,
)
from cli.commands.stats import (
    DEFAULT_SHAPE_LIMIT,
    SUITES,
    distribution_tool,
    resampling_tool,
    witness_tool,
)
from cli.commands.tables import BOUND_PROBLEMS, bounds_tool, table_hypergraph_tool
from cli.options import CliConfig, CliOptionError
from cli.output import emit, print_error
from config.solver_config import ConfigManager, SolverConfig
from mt_engine.criteria import CriterionKind
from mt_engine.parallel import ParallelMode, VcmepAlgorithm
from utils.error_reporter import EXIT_FAILURE, EXIT_OK, create_error_context, report_error
from utils.performance_profiler import PerformanceProfiler

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
PROG_NAME = "lopsided-mt"

CRITERIA = [kind.value for kind in CriterionKind]


@dataclass
class CliState:
    """Per-invocation state shared by the group and its subcommands."""

    config: SolverConfig
    as_table: bool = False
    profile: bool = False
    profiler: PerformanceProfiler = field(default_factory=PerformanceProfiler)


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.WARNING,
        format=LOG_FORMAT,
        stream=sys.stderr,
        force=True,
    )


def _fail(exception: Exception, operation: str, output: Path | None, as_table: bool) -> int:
    """Report an exception on stderr and in the JSON output, and return its exit code."""
    filename = getattr(exception, "filename", None)
    detailed = report_error(
        exception,
        create_error_context(operation),
        affected_files=[Path(filename)] if filename else None,
    )
    print_error(detailed)
    if output is not None or not as_table:
        try:
            emit({"status": "error", "error": detailed.to_dict()}, output, as_table=False)
        except OSError as e:
            logger.warning(f"Could not write error report: {e}")
    return detailed.exit_code


def _execute(
    ctx: click.Context,
    operation: str,
    tool: Callable[[], dict[str, Any]],
    output: Path | None = None,
) -> None:
    """Run a tool, emit its payload and exit with the matching code."""
    state: CliState = ctx.obj
    try:
        payload = tool()
        if state.profile:
            payload["timing"] = state.profiler.generate_report().to_dict()
        emit(payload, output, state.as_table)
    except Exception as e:
        code = _fail(e, operation, output, state.as_table)
    else:
        code = EXIT_OK if payload.get("status") == STATUS_OK else EXIT_FAILURE
    ctx.exit(code)


def _options(ctx: click.Context, subcommand: str, **flags: Any) -> CliConfig:
    state: CliState = ctx.obj
    return CliConfig.resolve(subcommand, state.config, **flags)


_input_argument = click.argument("input_path", type=click.Path(path_type=Path, dir_okay=False))
_seed_option = click.option("--seed", type=int, default=None, help="Root seed of all randomness")
_steps_option = click.option("--max-steps", type=int, default=None, help="Resampling budget")
_output_option = click.option(
    "--output",
    "-o",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help="Write the JSON result to this file",
)
_epsilon_option = click.option("--epsilon", type=float, default=None, help="Criterion slack")
_runs_option = click.option("--runs", type=int, default=None, help="Number of seeded runs")
_workers_option = click.option("--workers", type=int, default=None, help="Worker threads")


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.option(
    "--config",
    "config_path",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help="Configuration file (default: .lopsided-mt.yaml/.yml/.toml in the working directory)",
)
@click.option("--verbose", "-v", is_flag=True, help="Log debug output to stderr")
@click.option("--table", "as_table", is_flag=True, help="Print tables instead of JSON")
@click.option("--profile", is_flag=True, help="Attach wall time and memory per phase")
@click.version_option("0.1.0", prog_name=PROG_NAME)
@click.pass_context
def cli(
    ctx: click.Context, config_path: Path | None, verbose: bool, as_table: bool, profile: bool
) -> None:
    """Lopsided local lemma criteria and resampling solvers."""
    configure_logging(verbose)
    try:
        config = ConfigManager().load_config(config_path)
    except Exception as e:
        ctx.exit(_fail(e, "load_config", None, as_table))
    ctx.obj = CliState(config=config, as_table=as_table, profile=profile)


@cli.command("check")
@_input_argument
@click.option("--criterion", type=click.Choice(CRITERIA), default="blend", show_default=True)
@_epsilon_option
@click.option("--mu-uniform", type=float, default=None, help="Check this weight on every event")
@click.option("--max-iters", type=int, default=None, help="Weight search iteration budget")
@click.option("--enumeration-cap", type=int, default=None, help="Subset enumeration cap")
@_output_option
@click.pass_context
def check_command(
    ctx: click.Context,
    input_path: Path,
    criterion: str,
    epsilon: float | None,
    mu_uniform: float | None,
    max_iters: int | None,
    enumeration_cap: int | None,
    output: Path | None,
) -> None:
    """Report whether an instance satisfies a criterion."""

    def tool() -> dict[str, Any]:
        options = _options(
            ctx,
            "check",
            input_path=input_path,
            criterion=criterion,
            epsilon=epsilon,
            max_iters=max_iters,
            enumeration_cap=enumeration_cap,
            output=output,
        )
        return check_tool(options, ctx.obj.profiler, mu_uniform)

    _execute(ctx, "check", tool, output)


@cli.command("solve-sat")
@_input_argument
@click.option(
    "-L",
    "--occurrences",
    "occurrences",
    type=int,
    default=None,
    help="Occurrence bound L (default: the formula's maximum)",
)
@_epsilon_option
@_seed_option
@_steps_option
@_output_option
@click.pass_context
def solve_sat_command(
    ctx: click.Context,
    input_path: Path,
    occurrences: int | None,
    epsilon: float | None,
    seed: int | None,
    max_steps: int | None,
    output: Path | None,
) -> None:
    """Solve a k-CNF given in DIMACS format."""

    def tool() -> dict[str, Any]:
        options = _options(
            ctx,
            "solve-sat",
            input_path=input_path,
            epsilon=epsilon,
            seed=seed,
            max_steps=max_steps,
            output=output,
        )
        return solve_sat_tool(options, ctx.obj.profiler, occurrences)

    _execute(ctx, "solve-sat", tool, output)


@cli.command("solve-hypergraph")
@_input_argument
@click.option("--colors", "-c", type=int, default=2, show_default=True)
@_seed_option
@_steps_option
@_output_option
@click.pass_context
def solve_hypergraph_command(
    ctx: click.Context,
    input_path: Path,
    colors: int,
    seed: int | None,
    max_steps: int | None,
    output: Path | None,
) -> None:
    """Properly color a uniform hypergraph."""

    def tool() -> dict[str, Any]:
        options = _options(
            ctx,
            "solve-hypergraph",
            input_path=input_path,
            seed=seed,
            max_steps=max_steps,
            output=output,
        )
        return solve_hypergraph_tool(options, ctx.obj.profiler, colors)

    _execute(ctx, "solve-hypergraph", tool, output)


@cli.command("solve-transversal")
@_input_argument
@_seed_option
@_steps_option
@_output_option
@click.pass_context
def solve_transversal_command(
    ctx: click.Context,
    input_path: Path,
    seed: int | None,
    max_steps: int | None,
    output: Path | None,
) -> None:
    """Find an independent transversal of a partitioned graph."""

    def tool() -> dict[str, Any]:
        options = _options(
            ctx,
            "solve-transversal",
            input_path=input_path,
            seed=seed,
            max_steps=max_steps,
            output=output,
        )
        return solve_transversal_tool(options, ctx.obj.profiler)

    _execute(ctx, "solve-transversal", tool, output)


@cli.command("solve-hamiltonian")
@click.argument("input_path", type=click.Path(path_type=Path, dir_okay=False), required=False)
@click.option(
    "--circulant",
    type=(int, int),
    default=None,
    metavar="N K",
    help="Use the k-regular circulant graph on N vertices instead of a file",
)
@click.option("--p", "p", type=float, default=None, help="Inclusion probability")
@_seed_option
@_steps_option
@_output_option
@click.pass_context
def solve_hamiltonian_command(
    ctx: click.Context,
    input_path: Path | None,
    circulant: tuple[int, int] | None,
    p: float | None,
    seed: int | None,
    max_steps: int | None,
    output: Path | None,
) -> None:
    """Sample a vertex set certifying a second Hamiltonian cycle."""

    def tool() -> dict[str, Any]:
        options = _options(
            ctx,
            "solve-hamiltonian",
            input_path=input_path,
            seed=seed,
            max_steps=max_steps,
            output=output,
        )
        return solve_hamiltonian_tool(options, ctx.obj.profiler, circulant, p)

    _execute(ctx, "solve-hamiltonian", tool, output)


@cli.command("solve-ramsey")
@click.option("--n", "n", type=int, required=True, help="Vertex count of K_n")
@click.option("--s", "s", type=int, default=3, show_default=True, help="Forbidden red clique")
@click.option("--t", "t", type=int, default=None, help="Blue clique size to sample")
@click.option("--samples", type=int, default=None, help="Sampled t-sets per coloring")
@_seed_option
@_steps_option
@_output_option
@click.pass_context
def solve_ramsey_command(
    ctx: click.Context,
    n: int,
    s: int,
    t: int | None,
    samples: int | None,
    seed: int | None,
    max_steps: int | None,
    output: Path | None,
) -> None:
    """Color K_n without a red K_s."""
    state: CliState = ctx.obj

    def tool() -> dict[str, Any]:
        options = _options(ctx, "solve-ramsey", seed=seed, max_steps=max_steps, output=output)
        return solve_ramsey_tool(
            options,
            state.profiler,
            n,
            s,
            t,
            samples if samples is not None else state.config.ramsey.samples,
            state.config.ramsey.enumeration_cap,
        )

    _execute(ctx, "solve-ramsey", tool, output)


@cli.command("simulate-parallel")
@_input_argument
@click.option(
    "--mode",
    type=click.Choice([mode.value for mode in ParallelMode]),
    default="full",
    show_default=True,
)
@click.option(
    "--algorithm",
    type=click.Choice([algorithm.value for algorithm in VcmepAlgorithm]),
    default=None,
    help="Edge packing oracle",
)
@click.option("--max-rounds", type=int, default=None, help="Round budget")
@click.option(
    "--trace",
    "trace_path",
    type=click.Path(path_type=Path, dir_okay=False),
    default=None,
    help="Write the sub-round trace as JSON lines",
)
@_seed_option
@_workers_option
@_output_option
@click.pass_context
def simulate_parallel_command(
    ctx: click.Context,
    input_path: Path,
    mode: str,
    algorithm: str | None,
    max_rounds: int | None,
    trace_path: Path | None,
    seed: int | None,
    workers: int | None,
    output: Path | None,
) -> None:
    """Run the simplified, full or hybrid parallel algorithm."""

    def tool() -> dict[str, Any]:
        options = _options(
            ctx,
            "simulate-parallel",
            input_path=input_path,
            algorithm=algorithm,
            max_rounds=max_rounds,
            seed=seed,
            workers=workers,
            output=output,
        )
        return simulate_parallel_tool(options, ctx.obj.profiler, ParallelMode(mode), trace_path)

    _execute(ctx, "simulate-parallel", tool, output)


@cli.command("table-hypergraph")
@click.option("--c", "c", type=int, default=2, show_default=True, help="Number of colors")
@click.option("--kmin", type=int, default=4, show_default=True)
@click.option("--kmax", type=int, default=11, show_default=True)
@_output_option
@click.pass_context
def table_hypergraph_command(
    ctx: click.Context, c: int, kmin: int, kmax: int, output: Path | None
) -> None:
    """Largest hypergraph degrees under the new and the original criterion."""
    _execute(ctx, "table-hypergraph", lambda: table_hypergraph_tool(c, kmin, kmax), output)


@cli.command("bounds")
@click.option("--ksat", "problem", flag_value="ksat", help="k-SAT occurrence bounds")
@click.option("--hypergraph", "problem", flag_value="hypergraph", help="Coloring degree bounds")
@click.option("--transversal", "problem", flag_value="transversal", help="Class size threshold")
@click.option("--hamiltonian", "problem", flag_value="hamiltonian", help="Degree threshold")
@click.option("--ramsey", "problem", flag_value="ramsey", help="Edge probability and weights")
@click.option("--k", "k", type=int, default=None, help="Clause size, edge size or degree")
@click.option("--c", "c", type=int, default=2, show_default=True, help="Number of colors")
@click.option("--epsilon", type=float, default=0.0, show_default=True)
@click.option("--delta", type=int, default=None, help="Maximum degree")
@click.option("--b", "b", type=int, default=None, help="Class size")
@click.option("--n", "n", type=int, default=None)
@click.option("--s", "s", type=int, default=None)
@click.option("--t", "t", type=int, default=None)
@click.option("--resolution", type=float, default=1e-4, show_default=True)
@_output_option
@click.pass_context
def bounds_command(
    ctx: click.Context,
    problem: str | None,
    k: int | None,
    c: int,
    epsilon: float,
    delta: int | None,
    b: int | None,
    n: int | None,
    s: int | None,
    t: int | None,
    resolution: float,
    output: Path | None,
) -> None:
    """Evaluate the bound formulas of one application."""

    def tool() -> dict[str, Any]:
        if problem is None:
            raise CliOptionError("problem", f"pass one of --{', --'.join(BOUND_PROBLEMS)}")
        return bounds_tool(problem, k, c, epsilon, delta, b, n, s, t, resolution)

    _execute(ctx, "bounds", tool, output)


@cli.command("stats")
@click.argument("suite", type=click.Choice(SUITES))
@_input_argument
@click.option("--target", default=None, help="Outside event for the distribution suite")
@click.option("--criterion", type=click.Choice(CRITERIA), default=None)
@click.option(
    "--limit",
    type=int,
    default=DEFAULT_SHAPE_LIMIT,
    show_default=True,
    help="Tree shapes listed by the witness suite",
)
@_runs_option
@_seed_option
@_steps_option
@_workers_option
@_output_option
@click.pass_context
def stats_command(
    ctx: click.Context,
    suite: str,
    input_path: Path,
    target: str | None,
    criterion: str | None,
    limit: int,
    runs: int | None,
    seed: int | None,
    max_steps: int | None,
    workers: int | None,
    output: Path | None,
) -> None:
    """Statistical suites: resampling counts, witness trees, terminal distribution."""
    state: CliState = ctx.obj

    def tool() -> dict[str, Any]:
        options = _options(
            ctx,
            "stats",
            input_path=input_path,
            criterion=criterion,
            runs=runs,
            seed=seed,
            max_steps=max_steps,
            workers=workers,
            output=output,
        )
        if suite == "resampling":
            return resampling_tool(options, state.profiler)
        if suite == "witness":
            return witness_tool(options, state.profiler, limit)
        if target is None:
            raise CliOptionError("target", "the distribution suite needs --target")
        return distribution_tool(options, state.profiler, target)

    _execute(ctx, f"stats {suite}", tool, output)


@cli.command("init-config")
@click.option(
    "--format",
    "config_format",
    type=click.Choice(["yaml", "toml"]),
    default="yaml",
    show_default=True,
)
@click.option(
    "--directory",
    type=click.Path(path_type=Path, file_okay=False),
    default=Path("."),
    show_default=True,
)
@click.option(
    "--current",
    is_flag=True,
    help="Write the loaded configuration as plain YAML instead of the commented defaults",
)
@click.pass_context
def init_config_command(
    ctx: click.Context, config_format: str, directory: Path, current: bool
) -> None:
    """Write a commented default configuration file."""
    state: CliState = ctx.obj

    def tool() -> dict[str, Any]:
        path = ConfigManager().create_default_config_file(
            directory, config_format, config=state.config if current else None
        )
        return {"status": STATUS_OK, "path": path}

    _execute(ctx, "init-config", tool)


def run_cli(argv: Sequence[str] | None = None) -> int:
    """Run the command line and return its exit code instead of exiting.

    Args:
        argv: Arguments without the program name; ``None`` reads ``sys.argv``

    Returns:
        0 when solved or satisfied, 1 on an unsatisfied criterion or a
        non-terminating run, 2 on input, usage or configuration errors
    """
    try:
        result = cli.main(
            args=list(argv) if argv is not None else None,
            prog_name=PROG_NAME,
            standalone_mode=False,
        )
    except click.ClickException as e:
        e.show()
        return e.exit_code
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_FAILURE
    return result if isinstance(result, int) else EXIT_OK


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
