"""Degree tables and bound calculators."""

import logging
import math
from typing import Any

from applications.hamiltonian import (
    DEFAULT_RESOLUTION,
    hamiltonian_search,
    hamiltonian_threshold,
)
from applications.hypergraph import (
    BoundKind,
    asymptotic_alpha,
    asymptotic_bound,
    best_alpha,
    classical_bounds,
    hypergraph_lmax,
    hypergraph_table,
)
from applications.ksat import (
    ksat_alpha,
    ksat_bias,
    ksat_bounds,
    ksat_parallel_bound,
    ksat_symmetric_bound,
)
from applications.ramsey import ramsey_config
from applications.transversal import (
    transversal_alpha,
    transversal_fixed_point,
    transversal_parallel_factor,
    transversal_threshold,
)
from cli.commands import STATUS_OK
from cli.options import CliOptionError

logger = logging.getLogger(__name__)

BOUND_PROBLEMS = ("ksat", "hypergraph", "transversal", "hamiltonian", "ramsey")


def table_hypergraph_tool(c: int = 2, kmin: int = 4, kmax: int = 11) -> dict[str, Any]:
    """Largest degree L (new criterion) and L' (original criterion) for each edge size."""
    rows = hypergraph_table(c, kmin, kmax)
    return {"status": STATUS_OK, "c": c, "rows": [row.to_dict() for row in rows]}


def _need(name: str, value: int | None) -> int:
    if value is None:
        raise CliOptionError(name, "required for this bound")
    return value


def _ksat(k: int, epsilon: float) -> dict[str, Any]:
    l_new, l_gst = ksat_bounds(k)
    occurrences = math.floor(l_new)
    alpha = ksat_alpha(k, occurrences, epsilon)
    return {
        "k": k,
        "L_new": l_new,
        "L_gst": l_gst,
        "L_symmetric": ksat_symmetric_bound(k),
        "L_parallel": ksat_parallel_bound(k, epsilon),
        "L": occurrences,
        "alpha": alpha,
        "x": ksat_bias(alpha, k, occurrences),
    }


def _hypergraph(c: int, k: int) -> dict[str, Any]:
    occurrences = hypergraph_lmax(c, k, BoundKind.NEW)
    asymptotic = asymptotic_bound(c, k)
    result: dict[str, Any] = {
        "c": c,
        "k": k,
        "L": occurrences,
        "L_prime": hypergraph_lmax(c, k, BoundKind.ORIGINAL),
        "asymptotic": asymptotic,
        **classical_bounds(c, k),
    }
    if occurrences >= 1:
        alpha, margin = best_alpha(c, k, occurrences)
        result.update({"alpha": alpha, "margin": margin})
    if asymptotic >= 1:
        result["asymptotic_alpha"] = asymptotic_alpha(c, k, math.floor(asymptotic))
    return result


def _transversal(max_degree: int, b: int | None) -> dict[str, Any]:
    result: dict[str, Any] = {
        "delta": max_degree,
        "threshold": transversal_threshold(max_degree),
    }
    if b is not None:
        alpha = transversal_alpha(b, max_degree)
        result.update(
            {
                "b": b,
                "feasible": alpha is not None,
                "alpha": alpha,
                "fixed_point": transversal_fixed_point(b, max_degree),
                "parallel_factor": transversal_parallel_factor(b, max_degree),
            }
        )
    return result


def _hamiltonian(k: int | None, resolution: float) -> dict[str, Any]:
    if k is None:
        return {"threshold": hamiltonian_threshold(resolution=resolution)}
    return hamiltonian_search(k, resolution).to_dict()


def bounds_tool(
    problem: str,
    k: int | None = None,
    c: int = 2,
    epsilon: float = 0.0,
    delta: int | None = None,
    b: int | None = None,
    n: int | None = None,
    s: int | None = None,
    t: int | None = None,
    resolution: float = DEFAULT_RESOLUTION,
) -> dict[str, Any]:
    """Evaluate the bound formulas of one application.

    Args:
        problem: One of ``ksat``, ``hypergraph``, ``transversal``, ``hamiltonian``, ``ramsey``
        k: Clause size, edge size or degree
        c: Number of colors
        epsilon: Slack for the k-SAT parallel bound
        delta: Maximum degree of a partitioned graph
        b: Class size of a partitioned graph
        n: Vertex count of K_n
        s: Forbidden red clique size
        t: Blue clique size
        resolution: Grid step of the Hamiltonian inclusion-probability scan

    Raises:
        CliOptionError: If a parameter the problem needs is missing
    """
    if problem == "ksat":
        values = _ksat(_need("k", k), epsilon)
    elif problem == "hypergraph":
        values = _hypergraph(c, _need("k", k))
    elif problem == "transversal":
        values = _transversal(_need("delta", delta), b)
    elif problem == "hamiltonian":
        values = _hamiltonian(k, resolution)
    elif problem == "ramsey":
        values = ramsey_config(_need("n", n), _need("s", s), t).to_dict()
    else:
        raise CliOptionError("problem", f"expected one of {', '.join(BOUND_PROBLEMS)}")
    logger.debug(f"Bounds for {problem}: {values}")
    return {"status": STATUS_OK, "problem": problem, **values}
