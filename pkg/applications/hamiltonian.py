"""Vertex sets certifying a second Hamiltonian cycle in regular graphs.

Given a k-regular graph with a Hamiltonian cycle C, each vertex joins a set S
independently with probability p. Two families of bad-events must be avoided:
both endpoints of a cycle edge in S (type A), and a vertex together with all
of its k - 2 neighbors off the cycle outside S (type B). A set avoiding both
is independent on C and dominates through non-cycle edges.

Type A events get weight ``a`` and type B events weight ``b``. The lone ``a``
and ``b`` inside the parentheses are the own-weight term mu(B) that the
criterion adds for an event counted among its own orderable children::

    a >= p^2 (a + (1 + (k-2) b)^2)
    b >= (1-p)^{k-1} (b + (1 + 2a)^{k-1})

Dropping that term leaves a weaker system, available as ``self_terms=False``.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import networkx as nx
import numpy as np

from applications import ApplicationInputError
from mt_engine.model import Instance, VariableSpace
from mt_engine.sequential import DEFAULT_MAX_STEPS, RunResult, run

logger = logging.getLogger(__name__)

DEFAULT_RESOLUTION = 1e-4
MAX_P = 0.5
DEFAULT_MAX_ITERS = 20_000
DIVERGENCE_CAP = 1e9
CONVERGENCE_TOLERANCE = 1e-12
THRESHOLD_SCAN_LIMIT = 200


@dataclass
class HamiltonSearch:
    """Outcome of the inclusion-probability search for one degree."""

    k: int
    feasible: bool
    p: float | None = None
    a: float | None = None
    b: float | None = None
    feasible_points: int = 0
    resolution: float = DEFAULT_RESOLUTION

    def to_dict(self) -> dict[str, Any]:
        return {
            "k": self.k,
            "feasible": self.feasible,
            "p": self.p,
            "a": self.a,
            "b": self.b,
            "feasible_points": self.feasible_points,
            "resolution": self.resolution,
        }


@dataclass
class HamiltonConfig:
    """A k-regular graph, its Hamiltonian cycle and the event weights.

    Event ``i < n`` is type A for cycle edge ``(C[i], C[i+1])``; event ``n + v``
    is type B for vertex ``v``.
    """

    graph: nx.Graph
    cycle: list[int]
    k: int
    p: float
    a: float
    b: float

    @property
    def n(self) -> int:
        return len(self.cycle)

    def to_dict(self) -> dict[str, Any]:
        return {"n": self.n, "k": self.k, "p": self.p, "a": self.a, "b": self.b}


def _weights_on_grid(
    k: int, p: np.ndarray, max_iters: int, self_terms: bool = True
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Least fixed point of the weight system for every p, NaN where none is found.

    ``own`` multiplies the own-weight term mu(B). Iterates from ``a = b = 0``;
    points leave the active set once they converge or exceed the divergence cap.
    """
    a_out = np.full(p.shape, np.nan)
    b_out = np.full(p.shape, np.nan)
    index = np.arange(p.size)
    pa = p**2
    pb = (1.0 - p) ** (k - 1)
    a = np.zeros(p.size)
    b = np.zeros(p.size)
    own = 1.0 if self_terms else 0.0

    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(max_iters):
            a_new = pa * (own * a + (1.0 + (k - 2) * b) ** 2)
            b_new = pb * (own * b + (1.0 + 2.0 * a) ** (k - 1))
            diverged = ~(np.isfinite(a_new) & np.isfinite(b_new))
            diverged |= (a_new > DIVERGENCE_CAP) | (b_new > DIVERGENCE_CAP)
            change = np.maximum(
                np.abs(a_new - a) / np.maximum(1.0, a_new),
                np.abs(b_new - b) / np.maximum(1.0, b_new),
            )
            converged = ~diverged & (change < CONVERGENCE_TOLERANCE)
            a_out[index[converged]] = a_new[converged]
            b_out[index[converged]] = b_new[converged]

            keep = ~(converged | diverged)
            index, a, b, pa, pb = index[keep], a_new[keep], b_new[keep], pa[keep], pb[keep]
            if index.size == 0:
                break
    return p, a_out, b_out


def hamiltonian_search(
    k: int,
    resolution: float = DEFAULT_RESOLUTION,
    max_iters: int = DEFAULT_MAX_ITERS,
    self_terms: bool = True,
) -> HamiltonSearch:
    """Scan ``p`` over ``(0, 1/2]`` for a solution of the weight system.

    Among feasible grid points the one with the smallest ``a + b`` is reported.
    With ``self_terms=False`` the own-weight term mu(B) is left out of both
    right-hand sides, which admits smaller degrees.
    """
    if k < 3:
        raise ApplicationInputError(f"Degree must be at least 3, got {k}")
    steps = int(round(MAX_P / resolution))
    grid = np.arange(1, steps + 1) * resolution
    p, a, b = _weights_on_grid(k, grid, max_iters, self_terms)
    ok = np.isfinite(a) & np.isfinite(b)
    if not ok.any():
        logger.debug(f"No feasible p for k={k}")
        return HamiltonSearch(k=k, feasible=False, resolution=resolution)
    total = np.where(ok, a + b, np.inf)
    best = int(np.argmin(total))
    result = HamiltonSearch(
        k=k,
        feasible=True,
        p=float(p[best]),
        a=float(a[best]),
        b=float(b[best]),
        feasible_points=int(ok.sum()),
        resolution=resolution,
    )
    logger.debug(f"k={k}: p={result.p}, a={result.a:.6g}, b={result.b:.6g}")
    return result


def hamiltonian_threshold(
    kmin: int = 3, resolution: float = DEFAULT_RESOLUTION, kmax: int = THRESHOLD_SCAN_LIMIT
) -> int:
    """Smallest degree for which the search succeeds.

    Raises:
        ApplicationInputError: If no degree up to ``kmax`` is feasible
    """
    for k in range(kmin, kmax + 1):
        if hamiltonian_search(k, resolution).feasible:
            logger.info(f"Hamiltonian weight system first solvable at k={k}")
            return k
    raise ApplicationInputError(f"No feasible degree in {kmin}..{kmax}")


def circulant_hamiltonian_graph(n: int, k: int) -> tuple[nx.Graph, list[int]]:
    """k-regular circulant graph on ``n`` vertices whose cycle ``0, 1, ..., n-1`` is Hamiltonian.

    Odd ``k`` needs an even ``n`` and uses the antipodal offset ``n / 2``.
    """
    if k < 2 or n <= k:
        raise ApplicationInputError(f"Need 2 <= k < n, got n={n}, k={k}")
    offsets = list(range(1, k // 2 + 1))
    if k % 2:
        if n % 2:
            raise ApplicationInputError(f"Odd degree {k} needs an even vertex count, got {n}")
        offsets.append(n // 2)
    graph = nx.circulant_graph(n, offsets)
    return graph, list(range(n))


def _validate(graph: nx.Graph, cycle: Sequence[int]) -> int:
    n = graph.number_of_nodes()
    if set(graph.nodes) != set(range(n)):
        raise ApplicationInputError("Graph vertices must be 0..n-1")
    degrees = {d for _, d in graph.degree}
    if len(degrees) != 1:
        raise ApplicationInputError(f"Graph is not regular: degrees {sorted(degrees)}")
    k = degrees.pop()
    if len(cycle) != n or set(cycle) != set(range(n)):
        raise ApplicationInputError("Cycle must visit every vertex exactly once")
    for i, u in enumerate(cycle):
        v = cycle[(i + 1) % n]
        if not graph.has_edge(u, v):
            raise ApplicationInputError(f"Cycle step {u} -> {v} is not a graph edge")
    return k


def hamiltonian_build(
    graph: nx.Graph, cycle: Sequence[int], p: float | None = None
) -> tuple[Instance, HamiltonConfig]:
    """Build the type A and type B events of a k-regular graph with Hamiltonian cycle.

    Args:
        graph: k-regular graph on vertices ``0..n-1``
        cycle: Hamiltonian cycle as a vertex sequence
        p: Inclusion probability; found by :func:`hamiltonian_search` when omitted

    Raises:
        ApplicationInputError: If the graph is not regular, the cycle is not
            Hamiltonian, or no ``p`` is given and none is feasible
    """
    k = _validate(graph, cycle)
    n = len(cycle)
    search = hamiltonian_search(k)
    if p is None:
        if not search.feasible or search.p is None:
            raise ApplicationInputError(f"No feasible inclusion probability for k={k}")
        p = search.p
    elif not search.feasible:
        logger.warning(f"Weight system has no solution for k={k}; building with p={p}")

    cycle_edges = {frozenset((cycle[i], cycle[(i + 1) % n])) for i in range(n)}
    events: list[list[tuple[int, int]]] = [
        [(cycle[i], 1), (cycle[(i + 1) % n], 1)] for i in range(n)
    ]
    for v in range(n):
        off_cycle = [w for w in graph.neighbors(v) if frozenset((v, w)) not in cycle_edges]
        events.append([(v, 0)] + [(w, 0) for w in off_cycle])

    instance = Instance.from_terms(VariableSpace.boolean([p] * n), events)
    config = HamiltonConfig(
        graph=graph,
        cycle=list(cycle),
        k=k,
        p=p,
        a=search.a if search.a is not None else float("nan"),
        b=search.b if search.b is not None else float("nan"),
    )
    logger.info(f"Built Hamiltonian instance: n={n}, k={k}, p={p:.4f}")
    return instance, config


def selected_set(assignment: Sequence[int]) -> list[int]:
    return [v for v, inside in enumerate(assignment) if inside == 1]


def avoids_bad_events(config: HamiltonConfig, selected: Sequence[int]) -> bool:
    """No two cycle-consecutive vertices in S; each outside vertex has an off-cycle S neighbor."""
    inside = set(selected)
    n = config.n
    cycle = config.cycle
    if any(cycle[i] in inside and cycle[(i + 1) % n] in inside for i in range(n)):
        return False
    cycle_next = {cycle[i]: {cycle[(i + 1) % n], cycle[i - 1]} for i in range(n)}
    return all(
        v in inside
        or any(w in inside for w in config.graph.neighbors(v) if w not in cycle_next[v])
        for v in range(n)
    )


def solve_second_cycle(
    graph: nx.Graph,
    cycle: Sequence[int],
    seed: int,
    p: float | None = None,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> tuple[list[int], RunResult, HamiltonConfig]:
    """Sample a set S avoiding both event families by sequential resampling.

    Returns:
        The set S, the run result and the instance parameters
    """
    instance, config = hamiltonian_build(graph, cycle, p)
    result = run(instance, seed=seed, max_steps=max_steps)
    selected = selected_set(result.assignment)
    if not avoids_bad_events(config, selected):
        raise ApplicationInputError("Terminal set violates a bad-event")
    return selected, result, config
