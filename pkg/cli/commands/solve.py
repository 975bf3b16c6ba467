"""Build, solve and verify the application instances.

Every solver runs the sequential algorithm from the root seed and then checks
the terminal assignment against the original problem, not just against the
bad-events.
"""

import logging
import math
from typing import Any

from applications import ApplicationInputError
from applications.dimacs import load_dimacs
from applications.graph_io import load_graph
from applications.hamiltonian import circulant_hamiltonian_graph, solve_second_cycle
from applications.hypergraph import best_alpha, hypergraph_build, is_proper_coloring
from applications.ksat import assignment_to_bits, balanced_is_worst, ksat_build, ksat_check
from applications.ramsey import ramsey_build, ramsey_config, sample_blue_cliques, solve_ramsey
from applications.transversal import (
    chosen_vertices,
    is_independent_transversal,
    transversal_build,
    transversal_parallel_factor,
)
from cli.commands import STATUS_OK
from cli.commands.common import require_input
from cli.options import CliConfig, CliOptionError
from mt_engine.criteria import Criterion, CriterionKind, MuVector, check
from mt_engine.hypergraph_format import load_hypergraph
from mt_engine.model import Instance
from mt_engine.sequential import run
from utils.performance_profiler import PerformanceProfiler

logger = logging.getLogger(__name__)


def _blend_holds(instance: Instance, alpha: float | None, tolerance: float) -> bool:
    if alpha is None:
        return False
    criterion = Criterion(kind=CriterionKind.BLEND_CLOSED_FORM)
    return check(instance, MuVector.uniform(instance.m, alpha), criterion, tolerance).satisfied


def solve_sat_tool(
    options: CliConfig, profiler: PerformanceProfiler, occurrence_bound: int | None = None
) -> dict[str, Any]:
    """Solve a uniform k-CNF read from DIMACS.

    Args:
        options: Resolved options; ``input_path`` names the DIMACS file
        profiler: Collects phase timings
        occurrence_bound: L; defaults to the largest occurrence count of the formula
    """
    path = require_input(options)
    with profiler.profile_section("load"):
        cnf = load_dimacs(path)
        instance, config = ksat_build(cnf, occurrence_bound, options.epsilon)
    with profiler.profile_section("solve"):
        result = run(instance, seed=options.seed, max_steps=options.max_steps)
    if not cnf.is_satisfied(result.assignment):
        raise ApplicationInputError("Terminal assignment does not satisfy the formula")

    return {
        "status": STATUS_OK,
        "satisfied": True,
        "seed": options.seed,
        "steps": result.stats.steps,
        "config": config.to_dict(),
        "criterion_holds": ksat_check(instance, config).satisfied,
        "balanced_is_worst": balanced_is_worst(config),
        "model": assignment_to_bits(result.assignment),
    }


def solve_hypergraph_tool(
    options: CliConfig, profiler: PerformanceProfiler, colors: int = 2
) -> dict[str, Any]:
    """Properly color a uniform hypergraph read in the hypergraph text format.

    The reported criterion is the coloring bound at the maximum degree, which
    counts the other colors of an event's own edge once per event, not once per vertex.
    """
    path = require_input(options)
    with profiler.profile_section("load"):
        hypergraph = load_hypergraph(path)
        instance, config = hypergraph_build(hypergraph, colors)
    with profiler.profile_section("solve"):
        result = run(instance, seed=options.seed, max_steps=options.max_steps)
    if not is_proper_coloring(hypergraph.edges, result.assignment):
        raise ApplicationInputError("Terminal coloring has a monochromatic edge")
    _, margin = best_alpha(config.c, config.k, max(config.L, 1))

    return {
        "status": STATUS_OK,
        "seed": options.seed,
        "steps": result.stats.steps,
        "config": config.to_dict(),
        "criterion_holds": margin >= 0.0,
        "margin": margin,
        "coloring": result.assignment,
    }


def solve_transversal_tool(options: CliConfig, profiler: PerformanceProfiler) -> dict[str, Any]:
    """Find an independent transversal of a partitioned graph given as edge-list text."""
    path = require_input(options)
    with profiler.profile_section("load"):
        parsed = load_graph(path)
        if not parsed.classes:
            raise ApplicationInputError(f"{path} declares no 'class' lines")
        instance, config = transversal_build(parsed.graph, parsed.classes)
    with profiler.profile_section("solve"):
        result = run(instance, seed=options.seed, max_steps=options.max_steps)
    vertices = chosen_vertices(config, result.assignment)
    if not is_independent_transversal(config, vertices):
        raise ApplicationInputError("Terminal transversal contains an edge")

    return {
        "status": STATUS_OK,
        "seed": options.seed,
        "steps": result.stats.steps,
        "config": config.to_dict(),
        "criterion_holds": _blend_holds(instance, config.alpha, options.tolerance),
        "parallel_factor": transversal_parallel_factor(config.b, config.max_degree),
        "transversal": vertices,
    }


def solve_hamiltonian_tool(
    options: CliConfig,
    profiler: PerformanceProfiler,
    circulant: tuple[int, int] | None = None,
    p: float | None = None,
) -> dict[str, Any]:
    """Sample a vertex set certifying a second Hamiltonian cycle.

    The graph comes from the input file (which must carry a ``cycle`` line) or,
    with ``circulant=(n, k)``, is the k-regular circulant graph on n vertices.
    """
    with profiler.profile_section("load"):
        if circulant is not None:
            graph, cycle = circulant_hamiltonian_graph(*circulant)
        else:
            parsed = load_graph(require_input(options))
            if not parsed.cycle:
                raise ApplicationInputError("Input graph declares no 'cycle' line")
            graph, cycle = parsed.graph, parsed.cycle
    with profiler.profile_section("solve"):
        selected, result, config = solve_second_cycle(
            graph, cycle, options.seed, p=p, max_steps=options.max_steps
        )

    return {
        "status": STATUS_OK,
        "seed": options.seed,
        "steps": result.stats.steps,
        "config": config.to_dict(),
        "selected": selected,
    }


def solve_ramsey_tool(
    options: CliConfig,
    profiler: PerformanceProfiler,
    n: int,
    s: int,
    t: int | None = None,
    samples: int = 1,
    enumeration_cap: int | None = None,
) -> dict[str, Any]:
    """Color K_n without a red K_s, optionally estimating the blue K_t frequency.

    When ``C(n, s)`` is within ``enumeration_cap`` the full red-clique instance is
    also built and its criterion checked at the configured weight.
    """
    if n < 1:
        raise CliOptionError("n", "must be positive")
    config = ramsey_config(n, s, t)
    cap = enumeration_cap if enumeration_cap is not None else options.enumeration_cap
    payload: dict[str, Any] = {"status": STATUS_OK, "seed": options.seed}

    with profiler.profile_section("solve"):
        solution = solve_ramsey(config, options.seed, options.max_steps)
    payload.update({"config": config.to_dict(), "solution": solution.to_dict()})

    if math.comb(n, s) <= cap:
        with profiler.profile_section("criterion"):
            instance, _ = ramsey_build(n, s, t, enumeration_cap=cap)
            payload["criterion_holds"] = _blend_holds(instance, config.mu, options.tolerance)
    else:
        logger.info(f"Skipping criterion check: C({n},{s}) exceeds {cap}")

    if t is not None:
        with profiler.profile_section("blue_cliques"):
            estimate = sample_blue_cliques(config, [solution.coloring], t, options.seed, samples)
        payload["blue_cliques"] = estimate.to_dict()
    return payload
