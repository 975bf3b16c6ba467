"""Parallel algorithm simulation with sub-round trace."""

import logging
from concurrent.futures import Executor, ThreadPoolExecutor
from pathlib import Path
from typing import Any

from cli.commands import STATUS_OK
from cli.commands.common import load_checked_instance, require_input
from cli.options import CliConfig
from mt_engine.model import Instance
from mt_engine.parallel import (
    ParallelInvariantError,
    ParallelMode,
    ParallelResult,
    round_height_check,
    run_full,
    run_hybrid,
    run_simplified,
)
from utils.performance_profiler import PerformanceProfiler

logger = logging.getLogger(__name__)


def _simulate(
    instance: Instance, mode: ParallelMode, options: CliConfig, executor: Executor | None
) -> ParallelResult:
    if mode is ParallelMode.SIMPLIFIED:
        return run_simplified(instance, options.seed, options.max_rounds, executor)
    runner = run_full if mode is ParallelMode.FULL else run_hybrid
    return runner(instance, options.seed, options.max_rounds, options.algorithm, executor)


def simulate_parallel_tool(
    options: CliConfig,
    profiler: PerformanceProfiler,
    mode: ParallelMode = ParallelMode.FULL,
    trace_path: Path | None = None,
) -> dict[str, Any]:
    """Run one parallel variant on an instance file.

    Args:
        options: Resolved options; ``workers`` above 1 draws proposals on threads
        profiler: Collects phase timings
        mode: Which parallel variant to run
        trace_path: Where to write the per-sub-round trace as JSON lines

    Returns:
        Round counts, psi and the longest-path histogram; hybrid runs add the
        witness-tree height check
    """
    instance = load_checked_instance(require_input(options))
    with profiler.profile_section("simulate"):
        if options.workers > 1:
            with ThreadPoolExecutor(max_workers=options.workers) as executor:
                result = _simulate(instance, mode, options, executor)
        else:
            result = _simulate(instance, mode, options, None)

    remaining = instance.true_events(result.assignment)
    if remaining:
        raise ParallelInvariantError(f"Events {remaining[:5]} still true after termination")

    payload: dict[str, Any] = {
        "status": STATUS_OK,
        "seed": options.seed,
        "algorithm": options.algorithm.value,
        **result.to_dict(),
        "assignment": result.assignment,
    }
    if mode is ParallelMode.HYBRID:
        with profiler.profile_section("heights"):
            payload["heights"] = round_height_check(result, instance).to_dict()
    if trace_path is not None:
        trace_path.write_text(result.trace_jsonl(), encoding="utf-8")
        logger.info(f"Wrote {len(result.trace)} sub-round records to {trace_path}")
        payload["trace"] = str(trace_path)
    return payload
