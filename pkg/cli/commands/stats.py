"""Batch statistical suites over seeded runs.

Each suite compares an empirical quantity with its theoretical bound plus
three standard errors and reports ``unsatisfied`` if any comparison fails.
"""

import logging
from typing import Any

from cli.commands import STATUS_OK, STATUS_UNSATISFIED
from cli.commands.common import load_checked_instance, require_input, search_weights
from cli.options import CliConfig, CliOptionError
from mt_engine.instance_format import parse_terms
from mt_engine.model import BadEvent
from mt_engine.sequential import estimate_event_probability, resample_statistics
from mt_engine.witness import tree_statistics
from utils.performance_profiler import PerformanceProfiler

logger = logging.getLogger(__name__)

SUITES = ("resampling", "witness", "distribution")
DEFAULT_SHAPE_LIMIT = 50
Z_SCORE = 3.0


def resampling_tool(options: CliConfig, profiler: PerformanceProfiler) -> dict[str, Any]:
    """Mean resampling count of every event against its weight."""
    instance = load_checked_instance(require_input(options))
    with profiler.profile_section("weights"):
        mu = search_weights(instance, options)
    with profiler.profile_section("runs"):
        summary = resample_statistics(
            instance, options.runs, options.seed, options.max_steps, options.workers
        )
    limits = summary.upper_bounds(mu, Z_SCORE)
    events = [
        {
            "id": k,
            "mean": summary.mean[k],
            "sd": summary.sd[k],
            "mu": mu[k],
            "limit": limits[k],
            "ok": summary.mean[k] <= limits[k],
        }
        for k in range(instance.m)
    ]
    ok = all(record["ok"] for record in events)
    return {
        "status": STATUS_OK if ok else STATUS_UNSATISFIED,
        "suite": "resampling",
        "runs": options.runs,
        "seed": options.seed,
        "W": mu.total,
        "mean_steps": summary.mean_steps,
        "events": events,
    }


def witness_tool(
    options: CliConfig, profiler: PerformanceProfiler, limit: int = DEFAULT_SHAPE_LIMIT
) -> dict[str, Any]:
    """Frequency of every witness tree shape against its weight.

    Every observed shape is checked; only the ``limit`` most frequent ones are listed.
    """
    instance = load_checked_instance(require_input(options))
    with profiler.profile_section("runs"):
        shapes = tree_statistics(instance, options.runs, options.seed, options.max_steps)
    failing = [shape.hash for shape in shapes if not shape.ok]
    if failing:
        logger.warning(f"{len(failing)} tree shapes exceed their weight bound")
    return {
        "status": STATUS_UNSATISFIED if failing else STATUS_OK,
        "suite": "witness",
        "runs": options.runs,
        "seed": options.seed,
        "shapes": len(shapes),
        "failing": failing,
        "trees": [shape.to_dict() for shape in shapes[:limit]],
    }


def distribution_tool(
    options: CliConfig, profiler: PerformanceProfiler, target: str
) -> dict[str, Any]:
    """Frequency of an outside atomic event at termination against its bound.

    Args:
        options: Resolved options; ``input_path`` names the instance file
        profiler: Collects phase timings
        target: Event terms in instance syntax, e.g. ``"(0,1) (2,0)"``
    """
    instance = load_checked_instance(require_input(options))
    terms = parse_terms(target)
    if not terms:
        raise CliOptionError("target", "needs at least one (variable,value) pair")
    for variable, value in terms:
        if not instance.space.contains(variable, value):
            raise CliOptionError("target", f"({variable},{value}) is outside the variable space")
    if len({variable for variable, _ in terms}) != len(terms):
        raise CliOptionError("target", "demands two values of one variable")
    event = BadEvent.of(instance.m, terms)

    with profiler.profile_section("weights"):
        mu = search_weights(instance, options)
    with profiler.profile_section("runs"):
        estimate = estimate_event_probability(
            instance, mu, event, options.runs, options.seed, options.max_steps, options.workers
        )
    ok = estimate.frequency <= estimate.bound + Z_SCORE * estimate.sd
    return {
        "status": STATUS_OK if ok else STATUS_UNSATISFIED,
        "suite": "distribution",
        "seed": options.seed,
        "target": [list(term) for term in terms],
        "ok": ok,
        **estimate.to_dict(),
    }
