"""Parallel Moser-Tardos algorithms, simulated deterministically.

Three variants share one round structure. At the start of round ``t`` the
true events form ``V_{t,1}`` and the current assignment is frozen as ``a``.
Sub-rounds then pick a set of events from ``V_{t,s}``, resample some of them
and discard every event that was picked or that contains a variable whose
value changed, until ``V`` is empty.

* ``run_simplified`` picks a maximal variable-disjoint set and resamples it.
* ``run_full`` picks a capacitated edge packing, draws proposals and
  priorities, and applies the lexicographically-first maximal independent set
  of the resulting conflict graph.
* ``run_hybrid`` draws the same proposals and priorities but resamples the
  packed events one at a time in priority order, skipping events that are no
  longer true. With equal seeds it reproduces ``run_full`` exactly.

All draws go through ``KeyedStreams``: proposal ``x_{B,i}`` uses key
``(t, s, B, i)`` and priority ``rho(B)`` uses ``(t, s, B)``.
"""

import json
import logging
import math
from collections import Counter
from collections.abc import Callable, Iterable
from concurrent.futures import Executor
from dataclasses import dataclass, field
from enum import Enum
from typing import Any

import networkx as nx

from mt_engine.criteria import OrderabilityOracle
from mt_engine.model import Instance, is_true
from mt_engine.randomness import KeyedStreams, Purpose, initial_assignment
from mt_engine.sequential import DEFAULT_SEED, ExecutionLog, LogStep
from mt_engine.vcmep import CapacitatedHypergraph, vcmep_greedy, vcmep_parallel_sim
from mt_engine.witness import build

logger = logging.getLogger(__name__)

DEFAULT_MAX_ROUNDS = 10**4
PSI_WARNING_THRESHOLD = 1e-9
CAPACITY_TOLERANCE = 1e-12


class ParallelMode(Enum):
    SIMPLIFIED = "simplified"
    FULL = "full"
    HYBRID = "hybrid"


class VcmepAlgorithm(Enum):
    GREEDY = "greedy"
    PARALLEL = "parallel"


class ParallelNonTerminationError(Exception):
    """Exception raised when a parallel run exceeds its round budget."""

    def __init__(self, max_rounds: int, result: "ParallelResult") -> None:
        self.max_rounds = max_rounds
        self.result = result
        super().__init__(f"No termination within {max_rounds} rounds")


class ParallelInvariantError(Exception):
    """Exception raised when a round violates a structural guarantee."""

    pass


@dataclass
class RoundState:
    """Per-round constants: frozen assignment, switch probabilities and capacities."""

    t: int
    a: tuple[int, ...]
    q: tuple[float, ...]
    capacities: tuple[int, ...]
    max_event_size: int


@dataclass
class SubRoundRecord:
    """Telemetry of one sub-round, plus the assignment after it."""

    t: int
    s: int
    v_size: int
    i_size: int
    i_prime_size: int
    switched: list[int]
    longest_path: int
    assignment: tuple[int, ...] = ()

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "s": self.s,
            "V": self.v_size,
            "I": self.i_size,
            "I_prime": self.i_prime_size,
            "switched": list(self.switched),
            "longest_path": self.longest_path,
        }


@dataclass
class ParallelResult:
    """Outcome of a parallel run.

    Attributes:
        assignment: Final assignment
        mode: Which variant produced the run
        rounds: Number of rounds executed
        psi: One minus the largest single-value probability of any variable
        trace: One record per sub-round
        log: Flattened resampling log (hybrid and simplified runs)
        step_rounds: Round index of every logged step
        terminated: False when the round budget ran out
    """

    assignment: list[int]
    mode: ParallelMode
    rounds: int = 0
    psi: float = 1.0
    trace: list[SubRoundRecord] = field(default_factory=list)
    log: ExecutionLog | None = None
    step_rounds: list[int] = field(default_factory=list)
    terminated: bool = True

    @property
    def path_length_histogram(self) -> dict[int, int]:
        return dict(sorted(Counter(r.longest_path for r in self.trace).items()))

    @property
    def resamplings(self) -> int:
        return sum(r.i_prime_size for r in self.trace)

    def states(self) -> list[tuple[int, int, tuple[int, ...]]]:
        """``(t, s, assignment)`` after every sub-round."""
        return [(r.t, r.s, r.assignment) for r in self.trace]

    def trace_jsonl(self) -> str:
        return "".join(json.dumps(r.to_dict()) + "\n" for r in self.trace)

    def to_dict(self) -> dict[str, Any]:
        return {
            "mode": self.mode.value,
            "terminated": self.terminated,
            "rounds": self.rounds,
            "sub_rounds": len(self.trace),
            "resamplings": self.resamplings,
            "psi": self.psi,
            "path_length_histogram": self.path_length_histogram,
        }


def psi_margin(instance: Instance) -> float:
    """Largest psi with P(X_i = j) <= 1 - psi for every variable and value."""
    largest = max((max(probs) for probs in instance.space.probs if probs), default=0.0)
    return 1.0 - largest


def capacity(q: float, max_event_size: int, m: int) -> int:
    """C_i = ceil(1 / (M q_i)), at least 1 and at most m; m when q_i = 0."""
    if q <= 0.0:
        return max(1, m)
    raw = math.ceil(1.0 / (max_event_size * q) - CAPACITY_TOLERANCE)
    return max(1, min(m, raw))


def round_state(instance: Instance, t: int, assignment: list[int]) -> RoundState:
    space = instance.space
    size = max(1, instance.max_event_size)
    q = tuple(1.0 - space.probability(i, assignment[i]) for i in range(instance.n))
    return RoundState(
        t=t,
        a=tuple(assignment),
        q=q,
        capacities=tuple(capacity(qi, size, instance.m) for qi in q),
        max_event_size=size,
    )


def select_packing(
    instance: Instance,
    candidates: Iterable[int],
    capacities: tuple[int, ...],
    streams: KeyedStreams,
    t: int,
    s: int,
    algorithm: VcmepAlgorithm = VcmepAlgorithm.GREEDY,
) -> list[int]:
    """Capacitated maximal packing of candidate events, viewed as hyperedges over variables."""
    ids = sorted(candidates)
    hypergraph = CapacitatedHypergraph(
        n_vertices=instance.n,
        edges=tuple(instance.events[b].variables for b in ids),
        capacities=capacities,
    )
    if algorithm is VcmepAlgorithm.PARALLEL:
        seed = streams.derive_seed(Purpose.VCMEP_SEED, t, s)
        packing = vcmep_parallel_sim(hypergraph, seed).packing
    else:
        packing = vcmep_greedy(hypergraph)
    return [ids[index] for index in packing.edges]


Draw = tuple[dict[int, int], float]


def draw_proposals(
    instance: Instance,
    streams: KeyedStreams,
    t: int,
    s: int,
    selected: list[int],
    executor: Executor | None = None,
) -> dict[int, Draw]:
    """Proposed values ``x_{B,i}`` and priority ``rho(B)`` of every selected event."""

    def draw(event_id: int) -> Draw:
        event = instance.events[event_id]
        proposals = {
            i: instance.space.sample(i, streams.uniform(Purpose.PROPOSAL, t, s, event_id, i))
            for i in event.variables
        }
        return proposals, streams.uniform(Purpose.PRIORITY, t, s, event_id)

    mapper: Callable[..., Iterable[Draw]] = executor.map if executor is not None else map
    return dict(zip(selected, mapper(draw, selected), strict=True))


def build_conflict_graph(
    instance: Instance, draws: dict[int, Draw], a: tuple[int, ...]
) -> nx.DiGraph:
    """Edge B1 -> B2 when B1 has lower priority, they share variable i and x_{B1,i} != a_i.

    Priority ties are broken by event id.
    """
    graph = nx.DiGraph()
    for event_id, (_, rho) in draws.items():
        graph.add_node(event_id, rho=rho)

    by_variable: dict[int, list[int]] = {}
    for event_id in draws:
        for variable in instance.events[event_id].variables:
            by_variable.setdefault(variable, []).append(event_id)

    for variable, sharing in by_variable.items():
        ordered = sorted(sharing, key=lambda b: (draws[b][1], b))
        for position, lower in enumerate(ordered):
            if draws[lower][0][variable] == a[variable]:
                continue
            for higher in ordered[position + 1 :]:
                graph.add_edge(lower, higher)
    return graph


def lfmis_greedy(graph: nx.DiGraph) -> set[int]:
    """Peel sources: keep all current sources, delete them and their successors, repeat.

    Raises:
        ParallelInvariantError: If the graph has a directed cycle
    """
    remaining = graph.copy()
    chosen: set[int] = set()
    while remaining.number_of_nodes():
        sources = [node for node in remaining if remaining.in_degree(node) == 0]
        if not sources:
            raise ParallelInvariantError("Conflict graph contains a directed cycle")
        chosen.update(sources)
        doomed = set(sources)
        for source in sources:
            doomed.update(remaining.successors(source))
        remaining.remove_nodes_from(doomed)
    return chosen


def longest_path(graph: nx.DiGraph) -> int:
    """Edges on the longest directed path."""
    if graph.number_of_nodes() == 0:
        return 0
    return int(nx.dag_longest_path_length(graph))


def _changed(before: list[int], after: list[int], variables: Iterable[int]) -> list[int]:
    return sorted({i for i in variables if before[i] != after[i]})


def _shrink(
    instance: Instance, remaining: set[int], picked: Iterable[int], switched: set[int]
) -> set[int]:
    picked_set = set(picked)
    return {
        b
        for b in remaining
        if b not in picked_set and not switched.intersection(instance.events[b].variables)
    }


def _run(
    instance: Instance,
    mode: ParallelMode,
    seed: int,
    max_rounds: int,
    algorithm: VcmepAlgorithm,
    executor: Executor | None,
) -> ParallelResult:
    streams = KeyedStreams(seed)
    assignment = initial_assignment(instance.space, streams)
    result = ParallelResult(assignment=assignment, mode=mode, psi=psi_margin(instance))
    if result.psi < PSI_WARNING_THRESHOLD:
        logger.warning(f"Some variable is almost deterministic (psi={result.psi:.3g})")
    log = ExecutionLog(initial=tuple(assignment))
    if mode is not ParallelMode.FULL:
        result.log = log

    t = 0
    while True:
        remaining = set(instance.true_events(assignment))
        if not remaining:
            break
        if t >= max_rounds:
            result.terminated = False
            result.rounds = t
            logger.info(f"Parallel run ({mode.value}) hit the {max_rounds}-round budget")
            raise ParallelNonTerminationError(max_rounds, result)
        t += 1
        state = round_state(instance, t, assignment)

        s = 0
        while remaining:
            s += 1
            before = list(assignment)
            v_size = len(remaining)
            if mode is ParallelMode.SIMPLIFIED:
                ones = (1,) * instance.n
                selected = select_packing(instance, remaining, ones, streams, t, s)
            else:
                selected = select_packing(
                    instance, remaining, state.capacities, streams, t, s, algorithm
                )
            if not selected:
                raise ParallelInvariantError(f"Empty selection in round {t}, sub-round {s}")

            draws = draw_proposals(instance, streams, t, s, selected, executor)
            path = 0
            if mode is ParallelMode.SIMPLIFIED:
                applied = sorted(selected)
                for event_id in applied:
                    _apply(instance, assignment, event_id, draws[event_id][0], log, t, result)
            else:
                graph = build_conflict_graph(instance, draws, state.a)
                path = longest_path(graph)
                if mode is ParallelMode.FULL:
                    applied = sorted(lfmis_greedy(graph))
                    _apply_switches(instance, assignment, applied, draws, state.a)
                else:
                    applied = []
                    for event_id in sorted(selected, key=lambda b: (draws[b][1], b)):
                        if is_true(instance.events[event_id], assignment):
                            _apply(
                                instance, assignment, event_id, draws[event_id][0], log, t, result
                            )
                            applied.append(event_id)

            touched = {i for b in selected for i in instance.events[b].variables}
            switched = _changed(before, assignment, touched)
            if mode is ParallelMode.SIMPLIFIED:
                picked = set(selected)
                remaining = {
                    b
                    for b in remaining
                    if b not in picked and is_true(instance.events[b], assignment)
                }
            else:
                remaining = _shrink(instance, remaining, selected, set(switched))

            result.trace.append(
                SubRoundRecord(
                    t=t,
                    s=s,
                    v_size=v_size,
                    i_size=len(selected),
                    i_prime_size=len(applied),
                    switched=switched,
                    longest_path=path,
                    assignment=tuple(assignment),
                )
            )
            logger.debug(
                f"Round {t}.{s}: |V|={v_size} |I|={len(selected)} |I'|={len(applied)} "
                f"switched={len(switched)}"
            )

    result.rounds = t
    logger.info(
        f"Parallel run ({mode.value}) terminated after {t} rounds, {len(result.trace)} sub-rounds"
    )
    return result


def _apply(
    instance: Instance,
    assignment: list[int],
    event_id: int,
    proposals: dict[int, int],
    log: ExecutionLog,
    t: int,
    result: ParallelResult,
) -> None:
    event = instance.events[event_id]
    values = tuple(proposals[i] for i in event.variables)
    for variable, value in zip(event.variables, values, strict=True):
        assignment[variable] = value
    log.steps.append(LogStep(t=log.T + 1, event=event_id, values=values))
    result.step_rounds.append(t)


def _apply_switches(
    instance: Instance,
    assignment: list[int],
    chosen: list[int],
    draws: dict[int, Draw],
    a: tuple[int, ...],
) -> None:
    owner: dict[int, int] = {}
    for event_id in chosen:
        for variable, value in draws[event_id][0].items():
            if value == a[variable]:
                continue
            if variable in owner:
                raise ParallelInvariantError(
                    f"Variable {variable} switched by both {owner[variable]} and {event_id}"
                )
            owner[variable] = event_id
            assignment[variable] = value


def run_simplified(
    instance: Instance,
    seed: int = DEFAULT_SEED,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    executor: Executor | None = None,
) -> ParallelResult:
    """Resample a maximal variable-disjoint set of true events per sub-round.

    Raises:
        ParallelNonTerminationError: If more than ``max_rounds`` rounds would be needed
    """
    return _run(
        instance, ParallelMode.SIMPLIFIED, seed, max_rounds, VcmepAlgorithm.GREEDY, executor
    )


def run_full(
    instance: Instance,
    seed: int = DEFAULT_SEED,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    algorithm: VcmepAlgorithm = VcmepAlgorithm.GREEDY,
    executor: Executor | None = None,
) -> ParallelResult:
    """Full parallel algorithm with capacitated packing and LFMIS switching.

    Args:
        instance: Validated instance
        seed: Root seed
        max_rounds: Round budget
        algorithm: How each sub-round's packing is found
        executor: Optional executor for proposal draws; results do not depend on it

    Raises:
        ParallelNonTerminationError: If more than ``max_rounds`` rounds would be needed
        ParallelInvariantError: If two applied events switch the same variable
    """
    return _run(instance, ParallelMode.FULL, seed, max_rounds, algorithm, executor)


def run_hybrid(
    instance: Instance,
    seed: int = DEFAULT_SEED,
    max_rounds: int = DEFAULT_MAX_ROUNDS,
    algorithm: VcmepAlgorithm = VcmepAlgorithm.GREEDY,
    executor: Executor | None = None,
) -> ParallelResult:
    """Sequential coupling of ``run_full``: resample packed events in priority order.

    The result carries the flattened execution log and the round of every step.
    """
    return _run(instance, ParallelMode.HYBRID, seed, max_rounds, algorithm, executor)


@dataclass
class HeightIssue:
    step: int
    event: int
    round: int
    height: int

    def to_dict(self) -> dict[str, Any]:
        return {"step": self.step, "event": self.event, "round": self.round, "height": self.height}


@dataclass
class HeightReport:
    """Witness-tree height of every hybrid resampling against its round."""

    steps: int
    issues: list[HeightIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def to_dict(self) -> dict[str, Any]:
        return {"steps": self.steps, "ok": self.ok, "issues": [i.to_dict() for i in self.issues]}


def round_height_check(result: ParallelResult, instance: Instance) -> HeightReport:
    """Check that the witness tree of every resampling in round t has height t.

    Raises:
        ValueError: If the result carries no execution log
    """
    if result.log is None:
        raise ValueError("Round heights need a run with an execution log (hybrid)")
    oracle = OrderabilityOracle(instance)
    report = HeightReport(steps=result.log.T)
    for step, round_index in enumerate(result.step_rounds, start=1):
        height = build(result.log, step, instance, 1, oracle).height
        if height != round_index:
            report.issues.append(
                HeightIssue(
                    step=step, event=result.log.event_at(step), round=round_index, height=height
                )
            )
    if not report.ok:
        logger.info(f"{len(report.issues)} resamplings have tree height != round")
    return report
