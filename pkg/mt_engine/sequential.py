"""Sequential Moser-Tardos resampling.

While some bad-event is true, a past-only rule picks one of the true events
and all of its variables are redrawn from the product measure. Every draw is
addressed through ``KeyedStreams`` so a run is a pure function of its seed,
and the full execution log is kept for witness-tree analysis.
"""

import json
import logging
import math
import time
from collections.abc import Callable, Iterable, Sequence
from collections.abc import Set as AbstractSet
from dataclasses import dataclass, field
from typing import Any

from mt_engine.criteria import MuVector, enumerate_orderable_sets
from mt_engine.model import BadEvent, Instance, event_prob, is_true
from mt_engine.randomness import KeyedStreams, Purpose, draw_values, initial_assignment
from utils.parallel_processor import BatchRunner, batch_statistics

logger = logging.getLogger(__name__)

DEFAULT_SEED = 20160613
DEFAULT_MAX_STEPS = 10**6

ResampleRule = Callable[[Sequence[int], AbstractSet[int], int], int]


class NonTerminationError(Exception):
    """Exception raised when a run exceeds its step budget.

    The partial log and statistics stay attached for inspection.
    """

    def __init__(
        self, max_steps: int, log: "ExecutionLog", stats: "RunStats", assignment: list[int]
    ) -> None:
        self.max_steps = max_steps
        self.log = log
        self.stats = stats
        self.assignment = assignment
        super().__init__(f"No termination within {max_steps} resampling steps")


class RuleContractError(Exception):
    """Exception raised when a resample rule returns an event that is not true."""

    pass


class LogReplayError(Exception):
    """Exception raised when a log cannot be replayed against its instance."""

    def __init__(self, step: int, message: str) -> None:
        self.step = step
        super().__init__(f"step {step}: {message}")


def lowest_id_rule(assignment: Sequence[int], true_ids: AbstractSet[int], step: int) -> int:
    """Resample the true event with the smallest id."""
    return min(true_ids)


class RandomizedRule:
    """Pick a uniformly random true event from the RULE stream of the step."""

    def __init__(self, seed: int) -> None:
        self.streams = KeyedStreams(seed)

    def __call__(self, assignment: Sequence[int], true_ids: AbstractSet[int], step: int) -> int:
        ordered = sorted(true_ids)
        u = self.streams.uniform(Purpose.RULE, step)
        return ordered[min(int(u * len(ordered)), len(ordered) - 1)]


@dataclass(frozen=True)
class LogStep:
    """One resampling: step number, event id and the values drawn for its variables."""

    t: int
    event: int
    values: tuple[int, ...]

    def to_dict(self) -> dict[str, Any]:
        return {"t": self.t, "event": self.event, "values": list(self.values)}


@dataclass
class ExecutionLog:
    """Initial assignment followed by every resampling in order."""

    initial: tuple[int, ...]
    steps: list[LogStep] = field(default_factory=list)

    @property
    def T(self) -> int:  # noqa: N802
        return len(self.steps)

    def events(self) -> list[int]:
        """Resampled event ids, B_1..B_T."""
        return [step.event for step in self.steps]

    def event_at(self, t: int) -> int:
        """Event resampled at step ``t`` (1-based)."""
        if not 1 <= t <= self.T:
            raise IndexError(f"Step {t} outside 1..{self.T}")
        return self.steps[t - 1].event

    def to_jsonl(self) -> str:
        lines = [json.dumps({"initial": list(self.initial)})]
        lines.extend(json.dumps(step.to_dict()) for step in self.steps)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "ExecutionLog":
        records = [json.loads(line) for line in text.splitlines() if line.strip()]
        if not records or "initial" not in records[0]:
            raise ValueError("Execution log must start with an 'initial' record")
        steps = [
            LogStep(t=int(r["t"]), event=int(r["event"]), values=tuple(r["values"]))
            for r in records[1:]
        ]
        return cls(initial=tuple(records[0]["initial"]), steps=steps)


@dataclass
class RunStats:
    """Resampling counts and timing of one run."""

    steps: int
    counts: list[int]
    terminated: bool
    wall_time: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "steps": self.steps,
            "counts": list(self.counts),
            "terminated": self.terminated,
            "wall_time": self.wall_time,
        }


@dataclass
class RunResult:
    """Terminal assignment, execution log and statistics of a run."""

    assignment: list[int]
    log: ExecutionLog
    stats: RunStats


class TrueEventTracker:
    """Maintains the set of true events under single-variable updates.

    Each event keeps a count of its unsatisfied demands; an event is true
    exactly when that count is zero.
    """

    def __init__(self, instance: Instance, assignment: Sequence[int]) -> None:
        self.instance = instance
        self.unsatisfied = [
            sum(1 for i, j in event.terms if assignment[i] != j) for event in instance.events
        ]
        self.true_ids: set[int] = {k for k, count in enumerate(self.unsatisfied) if count == 0}

    def update(self, variable: int, old: int, new: int) -> None:
        if old == new:
            return
        for event_id in self.instance.events_with((variable, old)):
            if self.unsatisfied[event_id] == 0:
                self.true_ids.discard(event_id)
            self.unsatisfied[event_id] += 1
        for event_id in self.instance.events_with((variable, new)):
            self.unsatisfied[event_id] -= 1
            if self.unsatisfied[event_id] == 0:
                self.true_ids.add(event_id)


def resample_values(
    streams: KeyedStreams, instance: Instance, event: BadEvent, t: int
) -> list[int]:
    """Fresh values for the event's variables, drawn from the RESAMPLE stream of step ``t``."""
    variables = event.variables
    return draw_values(
        instance.space, variables, streams.uniforms(Purpose.RESAMPLE, t, size=len(variables))
    )


def run(
    instance: Instance,
    rule: ResampleRule = lowest_id_rule,
    seed: int = DEFAULT_SEED,
    max_steps: int = DEFAULT_MAX_STEPS,
) -> RunResult:
    """Run the sequential algorithm until no bad-event is true.

    Args:
        instance: Validated instance
        rule: Past-only choice among the currently true events
        seed: Root seed of all randomness in the run
        max_steps: Step budget

    Returns:
        Terminal assignment, execution log and statistics

    Raises:
        NonTerminationError: If more than ``max_steps`` resamplings would be needed
        RuleContractError: If ``rule`` picks an event that is not currently true
    """
    started = time.perf_counter()
    streams = KeyedStreams(seed)
    assignment = initial_assignment(instance.space, streams)
    log = ExecutionLog(initial=tuple(assignment))
    counts = [0] * instance.m
    tracker = TrueEventTracker(instance, assignment)

    t = 0
    while tracker.true_ids:
        if t >= max_steps:
            stats = RunStats(t, counts, False, time.perf_counter() - started)
            logger.info(f"Run with seed {seed} stopped after {t} steps without terminating")
            raise NonTerminationError(max_steps, log, stats, assignment)
        t += 1
        chosen = rule(assignment, frozenset(tracker.true_ids), t)
        if chosen not in tracker.true_ids:
            raise RuleContractError(f"Rule chose event {chosen} at step {t}, which is not true")

        event = instance.events[chosen]
        values = resample_values(streams, instance, event, t)
        for variable, value in zip(event.variables, values, strict=True):
            tracker.update(variable, assignment[variable], value)
            assignment[variable] = value
        counts[chosen] += 1
        log.steps.append(LogStep(t=t, event=chosen, values=tuple(values)))

    stats = RunStats(t, counts, True, time.perf_counter() - started)
    logger.debug(f"Run with seed {seed} terminated after {t} steps")
    return RunResult(assignment=assignment, log=log, stats=stats)


def replay(instance: Instance, log: ExecutionLog) -> list[list[int]]:
    """Rebuild the assignment before every step and after the last one.

    Returns:
        ``states[k]`` is the assignment after ``k`` steps, so ``states[t-1]`` is
        the assignment the step-``t`` resampling saw

    Raises:
        LogReplayError: If a logged event was not true before its step, or its
            values do not fit the event
    """
    current = list(log.initial)
    if len(current) != instance.n:
        raise LogReplayError(
            0, f"initial assignment has {len(current)} variables, not {instance.n}"
        )
    states = [list(current)]
    for step in log.steps:
        if not 0 <= step.event < instance.m:
            raise LogReplayError(step.t, f"unknown event {step.event}")
        event = instance.events[step.event]
        if not is_true(event, current):
            raise LogReplayError(step.t, f"event {step.event} was not true before resampling")
        if len(step.values) != len(event):
            raise LogReplayError(
                step.t, f"{len(step.values)} values for event of size {len(event)}"
            )
        for variable, value in zip(event.variables, step.values, strict=True):
            current[variable] = value
        states.append(list(current))
    return states


def run_batch(
    instance: Instance,
    seeds: Iterable[int],
    rule: ResampleRule = lowest_id_rule,
    max_steps: int = DEFAULT_MAX_STEPS,
    workers: int | None = None,
) -> list[RunResult]:
    """Run independent seeded runs, possibly on worker threads, in seed order.

    Raises:
        NonTerminationError: The first non-terminating run, in seed order
    """
    runner = BatchRunner(max_workers=workers)
    outcomes = runner.map(lambda s: run(instance, rule, s, max_steps), list(seeds))
    summary = batch_statistics(outcomes)
    if summary["failed"]:
        logger.warning(
            f"{summary['failed']} of {summary['total']} runs did not finish, "
            f"batch positions {summary['failed_indices']}"
        )
        raise next(o.error for o in outcomes if o.error is not None)
    logger.debug(
        f"Batch of {summary['total']} runs took {summary['total_time']:.3f}s, "
        f"slowest {summary['max_time']:.3f}s"
    )
    return [outcome.result for outcome in outcomes if outcome.result is not None]


def run_seeds(root_seed: int, runs: int) -> list[int]:
    """Per-run seeds derived from one root seed."""
    streams = KeyedStreams(root_seed)
    return [streams.derive_seed(Purpose.RUN, r) for r in range(runs)]


@dataclass
class ResampleSummary:
    """Mean resampling count of every event over a batch of runs."""

    runs: int
    mean: list[float]
    sd: list[float]
    mean_steps: float

    def upper_bounds(self, mu: MuVector, z: float = 3.0) -> list[float]:
        """mu(B) plus ``z`` standard errors, the statistical acceptance threshold."""
        return [mu[k] + z * self.sd[k] / math.sqrt(self.runs) for k in range(len(self.mean))]

    def to_dict(self) -> dict[str, Any]:
        return {"runs": self.runs, "mean": self.mean, "sd": self.sd, "mean_steps": self.mean_steps}


def resample_statistics(
    instance: Instance,
    runs: int,
    seed: int = DEFAULT_SEED,
    max_steps: int = DEFAULT_MAX_STEPS,
    workers: int | None = None,
) -> ResampleSummary:
    """Mean and standard deviation of per-event resampling counts over seeded runs."""
    results = run_batch(instance, run_seeds(seed, runs), max_steps=max_steps, workers=workers)
    mean: list[float] = []
    sd: list[float] = []
    for k in range(instance.m):
        samples = [r.stats.counts[k] for r in results]
        average = math.fsum(samples) / runs
        variance = math.fsum((x - average) ** 2 for x in samples) / max(1, runs - 1)
        mean.append(average)
        sd.append(math.sqrt(variance))
    mean_steps = math.fsum(r.stats.steps for r in results) / runs
    logger.info(f"Resampling statistics over {runs} runs: mean steps {mean_steps:.4g}")
    return ResampleSummary(runs=runs, mean=mean, sd=sd, mean_steps=mean_steps)


@dataclass
class DistributionEstimate:
    """Empirical frequency of an outside event at termination versus its bound."""

    frequency: float
    bound: float
    runs: int
    hits: int

    @property
    def sd(self) -> float:
        """Binomial standard error at the bound."""
        p = min(max(self.bound, 0.0), 1.0)
        return math.sqrt(p * (1.0 - p) / self.runs)

    def to_dict(self) -> dict[str, Any]:
        return {
            "frequency": self.frequency,
            "bound": self.bound,
            "runs": self.runs,
            "hits": self.hits,
            "sd": self.sd,
        }


def distribution_bound(instance: Instance, mu: MuVector, target: BadEvent) -> float:
    """P(E) times the total weight of the sets orderable to ``E``."""
    family_sum = math.fsum(
        math.prod(mu[b] for b in subset) for subset in enumerate_orderable_sets(target, instance)
    )
    return event_prob(target, instance.space) * family_sum


def estimate_event_probability(
    instance: Instance,
    mu: MuVector,
    target: BadEvent,
    runs: int,
    seed: int = DEFAULT_SEED,
    max_steps: int = DEFAULT_MAX_STEPS,
    workers: int | None = None,
) -> DistributionEstimate:
    """Estimate how often an outside atomic event holds when the algorithm stops.

    Args:
        instance: Instance whose criterion is satisfied by ``mu``
        mu: Weights of the instance events
        target: Atomic event that is not one of the instance's bad-events
        runs: Number of seeded runs
        seed: Root seed; run ``r`` uses the RUN stream key ``(r,)``

    Returns:
        Empirical frequency and its theoretical upper bound

    Raises:
        ValueError: If ``target`` is one of the instance's bad-events
    """
    if instance.find_event(target.terms) is not None:
        raise ValueError("Target event must not be one of the instance's bad-events")
    if runs < 1:
        raise ValueError("At least one run is required")

    bound = distribution_bound(instance, mu, target)
    results = run_batch(instance, run_seeds(seed, runs), max_steps=max_steps, workers=workers)
    hits = sum(1 for r in results if is_true(target, r.assignment))
    logger.info(f"Target held in {hits}/{runs} terminal assignments (bound {bound:.4g})")
    return DistributionEstimate(frequency=hits / runs, bound=bound, runs=runs, hits=hits)
