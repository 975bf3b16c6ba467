"""Criterion report for an instance file."""

import logging
from typing import Any

from cli.commands import STATUS_OK, STATUS_UNSATISFIED
from cli.commands.common import criterion_from, load_checked_instance, require_input
from cli.options import CliConfig
from mt_engine.criteria import (
    CriterionKind,
    MuNotFoundError,
    MuVector,
    check,
    find_mu_fixed_point,
)
from utils.performance_profiler import PerformanceProfiler

logger = logging.getLogger(__name__)


def check_tool(
    options: CliConfig, profiler: PerformanceProfiler, mu_uniform: float | None = None
) -> dict[str, Any]:
    """Check the selected criterion on an instance.

    Without ``mu_uniform`` the least weights are searched for first; a failed
    search makes the result ``unsatisfied`` with the reason attached.

    Args:
        options: Resolved options; ``input_path`` names the instance file
        profiler: Collects phase timings
        mu_uniform: Check this weight on every event instead of searching

    Returns:
        Criterion report with per-event records
    """
    path = require_input(options)
    with profiler.profile_section("load"):
        instance = load_checked_instance(path)
    criterion = criterion_from(options)
    result: dict[str, Any] = {
        "instance": {"path": str(path), "n": instance.n, "m": instance.m},
    }

    with profiler.profile_section("criterion"):
        if mu_uniform is not None:
            mu = MuVector.uniform(instance.m, mu_uniform)
        elif criterion.kind is CriterionKind.SYMMETRIC_LLL:
            mu = MuVector.uniform(instance.m, 0.0)
        else:
            try:
                mu = find_mu_fixed_point(
                    instance, criterion, max_iters=options.max_iters, cap=options.divergence_cap
                )
            except MuNotFoundError as e:
                logger.info(f"No weights for {criterion.kind.value}: {e.reason}")
                result.update(
                    {
                        "status": STATUS_UNSATISFIED,
                        "kind": criterion.kind.value,
                        "epsilon": criterion.epsilon,
                        "satisfied": False,
                        "reason": e.reason,
                        "iterations": e.iterations,
                    }
                )
                return result
        report = check(instance, mu, criterion, tolerance=options.tolerance)

    result.update(report.to_dict())
    result["status"] = STATUS_OK if report.satisfied else STATUS_UNSATISFIED
    return result
