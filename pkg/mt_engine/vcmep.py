"""Vertex-capacitated maximal edge packing.

A packing is a set of hyperedges in which every vertex ``v`` lies in at most
``C_v`` chosen edges; it is maximal when no further edge fits. Two solvers are
provided: a sequential greedy scan, and a simulated parallel algorithm that
rounds a fractional packing and de-selects edges at overloaded vertices.
"""

import logging
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any

from mt_engine.randomness import KeyedStreams, Purpose

logger = logging.getLogger(__name__)

DEFAULT_EPS = 0.5
DEFAULT_ROUND_CAP_FACTOR = 50
BRUTE_FORCE_LIMIT = 10


class HypergraphError(Exception):
    """Exception raised for a hypergraph that violates its invariants."""

    pass


class PackingNonTerminationError(Exception):
    """Exception raised when the parallel packer exceeds its round cap."""

    def __init__(self, rounds: int, trace: list["PackingRound"]) -> None:
        self.rounds = rounds
        self.trace = trace
        super().__init__(f"Edge packing not maximal after {rounds} rounds")


@dataclass(frozen=True)
class CapacitatedHypergraph:
    """Hypergraph on vertices ``0..n_vertices-1`` with a capacity per vertex.

    Capacities above the edge count behave exactly like the edge count.
    """

    n_vertices: int
    edges: tuple[tuple[int, ...], ...]
    capacities: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.capacities) != self.n_vertices:
            raise HypergraphError(
                f"{len(self.capacities)} capacities for {self.n_vertices} vertices"
            )
        for index, edge in enumerate(self.edges):
            if not edge:
                raise HypergraphError(f"Edge {index} is empty")
            if len(set(edge)) != len(edge):
                raise HypergraphError(f"Edge {index} repeats a vertex")
            if any(not 0 <= v < self.n_vertices for v in edge):
                raise HypergraphError(f"Edge {index} has a vertex out of range")
        if any(c < 0 for c in self.capacities):
            raise HypergraphError("Capacities must be nonnegative")

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def k(self) -> int:
        return max((len(edge) for edge in self.edges), default=0)

    @cached_property
    def incident(self) -> tuple[tuple[int, ...], ...]:
        """Edge indices containing each vertex."""
        incident: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for index, edge in enumerate(self.edges):
            for v in edge:
                incident[v].append(index)
        return tuple(tuple(ids) for ids in incident)

    @classmethod
    def uniform_capacity(
        cls, n_vertices: int, edges: Iterable[Sequence[int]], capacity: int
    ) -> "CapacitatedHypergraph":
        return cls(
            n_vertices=n_vertices,
            edges=tuple(tuple(edge) for edge in edges),
            capacities=(capacity,) * n_vertices,
        )


@dataclass
class Packing:
    """Chosen edge indices and the resulting load of every vertex."""

    edges: list[int]
    loads: list[int]

    @classmethod
    def of(cls, hypergraph: CapacitatedHypergraph, edges: Iterable[int]) -> "Packing":
        chosen = sorted(set(edges))
        loads = [0] * hypergraph.n_vertices
        for index in chosen:
            for v in hypergraph.edges[index]:
                loads[v] += 1
        return cls(edges=chosen, loads=loads)

    def __len__(self) -> int:
        return len(self.edges)

    def to_dict(self) -> dict[str, Any]:
        return {"edges": list(self.edges), "size": len(self.edges)}


def _fits(hypergraph: CapacitatedHypergraph, loads: Sequence[int], edge: int) -> bool:
    return all(loads[v] < hypergraph.capacities[v] for v in hypergraph.edges[edge])


def is_feasible(hypergraph: CapacitatedHypergraph, packing: Packing) -> bool:
    """Every vertex load is within its capacity."""
    return all(load <= cap for load, cap in zip(packing.loads, hypergraph.capacities, strict=True))


def is_maximal(hypergraph: CapacitatedHypergraph, packing: Packing) -> bool:
    """Every edge outside the packing touches a saturated vertex."""
    chosen = set(packing.edges)
    return all(
        not _fits(hypergraph, packing.loads, index)
        for index in range(hypergraph.m)
        if index not in chosen
    )


def vcmep_greedy(
    hypergraph: CapacitatedHypergraph, order: Sequence[int] | None = None
) -> Packing:
    """Scan edges in ``order`` (default: by index) and keep every edge that still fits."""
    loads = [0] * hypergraph.n_vertices
    chosen: list[int] = []
    for index in order if order is not None else range(hypergraph.m):
        if _fits(hypergraph, loads, index):
            chosen.append(index)
            for v in hypergraph.edges[index]:
                loads[v] += 1
    return Packing(edges=sorted(chosen), loads=loads)


def max_packing_size(
    hypergraph: CapacitatedHypergraph,
    edges: Sequence[int] | None = None,
    capacities: Sequence[int] | None = None,
) -> int:
    """Size of a maximum packing, by exhaustive search over at most ten edges.

    Raises:
        ValueError: If more than ten edges are involved
    """
    pool = list(edges) if edges is not None else list(range(hypergraph.m))
    caps = list(capacities) if capacities is not None else list(hypergraph.capacities)
    if len(pool) > BRUTE_FORCE_LIMIT:
        raise ValueError(f"Brute-force packing is limited to {BRUTE_FORCE_LIMIT} edges")
    for size in range(len(pool), 0, -1):
        for subset in combinations(pool, size):
            loads = [0] * hypergraph.n_vertices
            for index in subset:
                for v in hypergraph.edges[index]:
                    loads[v] += 1
            if all(load <= cap for load, cap in zip(loads, caps, strict=True)):
                return size
    return 0


def fractional_packing(
    hypergraph: CapacitatedHypergraph,
    edges: Sequence[int],
    residual: Sequence[int],
    eps: float = DEFAULT_EPS,
) -> dict[int, float]:
    """Water-filling fractional packing of ``edges`` under residual capacities.

    All unfrozen edge values rise together; an edge freezes once it reaches 1
    or one of its vertices carries (1 - eps) times its residual capacity.
    """
    x = {index: 0.0 for index in edges}
    active = set(edges)
    load = [0.0] * hypergraph.n_vertices
    limit = [(1.0 - eps) * c for c in residual]

    while active:
        counts: dict[int, int] = {}
        for index in active:
            for v in hypergraph.edges[index]:
                counts[v] = counts.get(v, 0) + 1
        step = min(1.0 - x[index] for index in active)
        for v, count in counts.items():
            step = min(step, (limit[v] - load[v]) / count)
        step = max(step, 0.0)
        for index in active:
            x[index] += step
        for v, count in counts.items():
            load[v] += step * count
        tight = {v for v in counts if load[v] >= limit[v] - 1e-12}
        active = {
            index
            for index in active
            if x[index] < 1.0 - 1e-12 and not tight.intersection(hypergraph.edges[index])
        }
    return x


@dataclass
class PackingRound:
    """Telemetry of one round of the parallel packer."""

    round: int
    residual_edges: int
    fractional_value: float
    selected: int
    committed: int
    packing_size: int
    phi: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "round": self.round,
            "residual_edges": self.residual_edges,
            "fractional_value": self.fractional_value,
            "selected": self.selected,
            "committed": self.committed,
            "packing_size": self.packing_size,
            "phi": self.phi,
        }


@dataclass
class ParallelPackingResult:
    packing: Packing
    trace: list[PackingRound] = field(default_factory=list)
    final_phi: int | None = None

    @property
    def rounds(self) -> int:
        return len(self.trace)


def default_round_cap(hypergraph: CapacitatedHypergraph) -> int:
    return math.ceil(DEFAULT_ROUND_CAP_FACTOR * max(1, hypergraph.k) * math.log(hypergraph.m + 2))


def _residual(
    hypergraph: CapacitatedHypergraph, loads: Sequence[int], chosen: set[int]
) -> list[int]:
    return [i for i in range(hypergraph.m) if i not in chosen and _fits(hypergraph, loads, i)]


def vcmep_parallel_sim(
    hypergraph: CapacitatedHypergraph,
    seed: int,
    eps: float = DEFAULT_EPS,
    round_cap: int | None = None,
    streams: KeyedStreams | None = None,
) -> ParallelPackingResult:
    """Simulated parallel packing by randomized rounding.

    Each round computes a fractional packing of the residual edges, selects
    every residual edge independently with probability ``x_f / (2k)``, drops
    all selected edges at any vertex whose residual capacity is exceeded, and
    commits the rest. The edge draw of round ``r`` uses the VCMEP stream key
    ``(r, edge)``.

    Args:
        hypergraph: Capacitated hypergraph
        seed: Root seed, ignored when ``streams`` is given
        eps: Fractional packing slack in (0, 1/2]
        round_cap: Round budget, default ``ceil(50 k log(m + 2))``
        streams: Keyed streams to draw from

    Returns:
        Feasible maximal packing and per-round trace; ``phi`` (the largest
        packing of the residual hypergraph at the start of a round) and
        ``final_phi`` are filled in when m <= 10

    Raises:
        PackingNonTerminationError: If the round budget runs out
    """
    if not 0.0 < eps <= 0.5:
        raise ValueError(f"eps must lie in (0, 1/2], got {eps}")
    streams = streams or KeyedStreams(seed)
    cap = round_cap if round_cap is not None else default_round_cap(hypergraph)
    k = max(1, hypergraph.k)
    track_phi = hypergraph.m <= BRUTE_FORCE_LIMIT

    chosen: set[int] = set()
    loads = [0] * hypergraph.n_vertices
    trace: list[PackingRound] = []
    final_phi: int | None = None

    for round_index in range(1, cap + 2):
        residual_edges = _residual(hypergraph, loads, chosen)
        residual_caps = [c - load for c, load in zip(hypergraph.capacities, loads, strict=True)]
        phi = (
            max_packing_size(hypergraph, residual_edges, residual_caps) if track_phi else None
        )
        if not residual_edges:
            final_phi = phi
            break
        if round_index > cap:
            raise PackingNonTerminationError(cap, trace)

        x = fractional_packing(hypergraph, residual_edges, residual_caps, eps)
        selected = [
            index
            for index in residual_edges
            if streams.uniform(Purpose.VCMEP, round_index, index) < min(1.0, x[index] / (2 * k))
        ]
        hits: dict[int, int] = {}
        for index in selected:
            for v in hypergraph.edges[index]:
                hits[v] = hits.get(v, 0) + 1
        violated = {v for v, count in hits.items() if count > residual_caps[v]}
        survivors = [i for i in selected if not violated.intersection(hypergraph.edges[i])]
        for index in survivors:
            chosen.add(index)
            for v in hypergraph.edges[index]:
                loads[v] += 1

        trace.append(
            PackingRound(
                round=round_index,
                residual_edges=len(residual_edges),
                fractional_value=math.fsum(x.values()),
                selected=len(selected),
                committed=len(survivors),
                packing_size=len(chosen),
                phi=phi,
            )
        )
        logger.debug(
            f"Packing round {round_index}: {len(selected)} selected, {len(survivors)} committed"
        )

    return ParallelPackingResult(
        packing=Packing.of(hypergraph, chosen), trace=trace, final_phi=final_phi
    )
