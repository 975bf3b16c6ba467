"""Convergence criteria for the Moser-Tardos algorithm.

This module evaluates the orderable-set criterion, its assignable relaxation,
the closed-form blend of both, and the classical criteria they improve on
(symmetric and asymmetric LLL, the lopsided LLL in set and variable form,
and Pegden's independent-set criterion). It also enumerates orderable,
assignable and independent families, and searches for a weight vector
satisfying a criterion by monotone fixed-point iteration.
"""

import logging
import math
from collections.abc import Callable, Iterable, Iterator, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Any

import networkx as nx

from mt_engine.model import BadEvent, Instance, Term, disagreement, event_prob

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 10**7
DEFAULT_MAX_ITERS = 10**5
DEFAULT_DIVERGENCE_CAP = 1e9
CONVERGENCE_TOLERANCE = 1e-12
CHECK_TOLERANCE = 1e-9


class CriterionKind(Enum):
    """Supported convergence criteria."""

    SYMMETRIC_LLL = "symmetric-lll"
    ASYMMETRIC_LLL = "asymmetric-lll"
    LLLL = "llll"
    LLLL_VARIABLE = "llll-variable"
    PEGDEN_GENERAL = "pegden-general"
    PEGDEN_VARIABLE = "pegden-variable"
    BLEND_CLOSED_FORM = "blend"
    ORDERABLE_EXACT = "orderable"
    ASSIGNABLE_EXACT = "assignable"


EXACT_KINDS = frozenset(
    {CriterionKind.ORDERABLE_EXACT, CriterionKind.ASSIGNABLE_EXACT, CriterionKind.PEGDEN_GENERAL}
)


class NeighborRelation(Enum):
    """Adjacency used by the classical criteria."""

    LOPSIDED = "lopsided"
    DEPENDENCY = "dependency"


class EnumerationCapError(Exception):
    """Exception raised when a subset enumeration exceeds its cap."""

    pass


class MuNotFoundError(Exception):
    """Exception raised when the fixed-point search finds no weight vector.

    This signals that no vector was found, not that none exists.
    """

    def __init__(self, reason: str, iterations: int, last: "MuVector | None" = None) -> None:
        self.reason = reason
        self.iterations = iterations
        self.last = last
        super().__init__(f"No weight vector found after {iterations} iterations: {reason}")


@dataclass(frozen=True)
class Criterion:
    """A criterion kind together with its slack and options.

    Attributes:
        kind: Which criterion to evaluate
        epsilon: Slack; every right-hand side is multiplied by (1 + epsilon)
        relation: Adjacency for the symmetric, asymmetric and Pegden kinds. ``None``
            selects full dependency for the LLL kinds and lopsidependency for Pegden
        enumeration_cap: Maximum number of subsets an exact kind may enumerate per event
    """

    kind: CriterionKind
    epsilon: float = 0.0
    relation: NeighborRelation | None = None
    enumeration_cap: int = DEFAULT_ENUMERATION_CAP

    def __post_init__(self) -> None:
        if not math.isfinite(self.epsilon) or self.epsilon < 0:
            raise ValueError(f"Slack epsilon must be finite and >= 0, got {self.epsilon}")
        if self.enumeration_cap < 1:
            raise ValueError("Enumeration cap must be positive")

    @property
    def slack(self) -> float:
        return 1.0 + self.epsilon

    @property
    def effective_relation(self) -> NeighborRelation:
        if self.relation is not None:
            return self.relation
        if self.kind in (CriterionKind.SYMMETRIC_LLL, CriterionKind.ASYMMETRIC_LLL):
            return NeighborRelation.DEPENDENCY
        return NeighborRelation.LOPSIDED


@dataclass(frozen=True)
class MuVector:
    """Nonnegative finite weight per bad-event, indexed by event id."""

    values: tuple[float, ...]

    def __post_init__(self) -> None:
        for index, value in enumerate(self.values):
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Weight of event {index} must be finite and >= 0, got {value}")

    @classmethod
    def of(cls, values: Iterable[float]) -> "MuVector":
        return cls(tuple(float(v) for v in values))

    @classmethod
    def uniform(cls, m: int, value: float) -> "MuVector":
        return cls((float(value),) * m)

    def __getitem__(self, event_id: int) -> float:
        return self.values[event_id]

    def __len__(self) -> int:
        return len(self.values)

    @property
    def total(self) -> float:
        """W, the sum of all weights."""
        return math.fsum(self.values)


@dataclass
class EventCheck:
    """Criterion outcome for one bad-event."""

    id: int
    mu: float
    rhs: float
    ok: bool
    lhs: float | None = None

    def to_dict(self) -> dict[str, Any]:
        record: dict[str, Any] = {"id": self.id, "mu": self.mu, "rhs": self.rhs, "ok": self.ok}
        if self.lhs is not None:
            record["lhs"] = self.lhs
        return record


@dataclass
class CriterionReport:
    """Per-event and overall result of checking a criterion."""

    kind: CriterionKind
    epsilon: float
    events: list[EventCheck] = field(default_factory=list)
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def satisfied(self) -> bool:
        return all(check.ok for check in self.events)

    @property
    def W(self) -> float:  # noqa: N802
        return math.fsum(check.mu for check in self.events)

    @property
    def failing(self) -> list[int]:
        return [check.id for check in self.events if not check.ok]

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "epsilon": self.epsilon,
            "satisfied": self.satisfied,
            "W": self.W,
            "events": [check.to_dict() for check in self.events],
            **self.details,
        }


# ---------------------------------------------------------------------------
# Orderable and assignable families
# ---------------------------------------------------------------------------


def _peelable(cover_sets: Sequence[frozenset[Term]]) -> bool:
    """Decide whether the sets admit an ordering where each adds a fresh element.

    An ordering B_1..B_s with z_i in D(B_i) and z_i outside D(B_1..B_{i-1})
    exists iff the family can be emptied by repeatedly removing a set that owns
    an element no other remaining set covers (the removed set goes last).
    Removing a set never destroys another set's private element, so the greedy
    choice of which peelable set to remove is irrelevant.
    """
    remaining = list(cover_sets)
    while remaining:
        for index, candidate in enumerate(remaining):
            others: set[Term] = set()
            for other_index, other in enumerate(remaining):
                if other_index != index:
                    others.update(other)
            if candidate - others:
                del remaining[index]
                break
        else:
            return False
    return True


def _matchable(cover_sets: Sequence[frozenset[Term]]) -> bool:
    """Decide whether an injective choice of one element per set exists."""
    if not cover_sets:
        return True
    if any(not cover for cover in cover_sets):
        return False
    graph = nx.Graph()
    left = [("event", index) for index in range(len(cover_sets))]
    graph.add_nodes_from(left)
    for index, cover in enumerate(cover_sets):
        for term in cover:
            graph.add_edge(("event", index), ("term", term))
    matching = nx.bipartite.hopcroft_karp_matching(graph, top_nodes=left)
    return sum(1 for node in left if node in matching) == len(cover_sets)


def _member_id(target: BadEvent, instance: Instance) -> int | None:
    if 0 <= target.id < instance.m and instance.events[target.id].terms == target.terms:
        return target.id
    return instance.find_event(target.terms)


def _lopsided_candidates(target: BadEvent, instance: Instance) -> list[int]:
    member = _member_id(target, instance)
    if member is not None:
        return sorted(instance.lopsided_neighbors(member))
    candidates: set[int] = set()
    for term in target.terms:
        candidates.update(instance.disagreeing(term))
    return sorted(candidates)


def _enumerate_closed_family(
    candidates: Sequence[int],
    accepts: Callable[[tuple[int, ...]], bool],
    cap: int,
    label: str,
) -> Iterator[frozenset[int]]:
    """Depth-first enumeration of a subset family closed under taking subsets."""
    count = 0
    stack: list[tuple[tuple[int, ...], int]] = [((), 0)]
    while stack:
        chosen, start = stack.pop()
        count += 1
        if count > cap:
            raise EnumerationCapError(f"{label} enumeration exceeded cap of {cap} subsets")
        yield frozenset(chosen)
        for index in range(len(candidates) - 1, start - 1, -1):
            extended = chosen + (candidates[index],)
            if accepts(extended):
                stack.append((extended, index + 1))


def _family(
    target: BadEvent,
    instance: Instance,
    cap: int,
    test: Callable[[Sequence[frozenset[Term]]], bool],
    label: str,
) -> Iterator[frozenset[int]]:
    candidates = _lopsided_candidates(target, instance)
    covers = {c: disagreement(target.terms, instance.events[c]) for c in candidates}

    def accepts(ids: tuple[int, ...]) -> bool:
        return test([covers[c] for c in ids])

    yielded = 0
    for subset in _enumerate_closed_family(candidates, accepts, cap, label):
        yielded += 1
        yield subset
    member = _member_id(target, instance)
    if member is not None:
        if yielded + 1 > cap:
            raise EnumerationCapError(f"{label} enumeration exceeded cap of {cap} subsets")
        yield frozenset({member})


def enumerate_orderable_sets(
    target: BadEvent, instance: Instance, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[frozenset[int]]:
    """Yield every event subset orderable to ``target``, each exactly once.

    The empty set is always yielded; ``{target}`` is yielded when the target
    belongs to the instance.

    Raises:
        EnumerationCapError: If more than ``cap`` subsets would be produced
    """
    return _family(target, instance, cap, _peelable, "orderable")


def enumerate_assignable_sets(
    target: BadEvent, instance: Instance, cap: int = DEFAULT_ENUMERATION_CAP
) -> Iterator[frozenset[int]]:
    """Yield every event subset assignable to ``target``, each exactly once."""
    return _family(target, instance, cap, _matchable, "assignable")


def _neighbors(target: BadEvent, instance: Instance, relation: NeighborRelation) -> list[int]:
    if relation is NeighborRelation.LOPSIDED:
        return _lopsided_candidates(target, instance)
    member = _member_id(target, instance)
    if member is not None:
        return sorted(instance.dependent_neighbors(member))
    neighbors: set[int] = set()
    for variable in target.variables:
        neighbors.update(instance.events_on(variable))
    return sorted(neighbors)


def _adjacent(instance: Instance, id1: int, id2: int, relation: NeighborRelation) -> bool:
    if relation is NeighborRelation.LOPSIDED:
        return instance.lopsidependent(id1, id2)
    return id2 in instance.dependent_neighbors(id1)


def enumerate_independent_neighbor_sets(
    target: BadEvent,
    instance: Instance,
    relation: NeighborRelation = NeighborRelation.LOPSIDED,
    cap: int = DEFAULT_ENUMERATION_CAP,
) -> Iterator[frozenset[int]]:
    """Yield the independent subsets of the target's neighborhood, empty set included."""
    candidates = _neighbors(target, instance, relation)

    def accepts(ids: tuple[int, ...]) -> bool:
        newest = ids[-1]
        return not any(_adjacent(instance, newest, other, relation) for other in ids[:-1])

    return _enumerate_closed_family(candidates, accepts, cap, "independent-set")


def is_orderable(target: BadEvent, event_ids: Iterable[int], instance: Instance) -> bool:
    """Check whether a set of event ids is orderable to ``target``."""
    ids = frozenset(event_ids)
    member = _member_id(target, instance)
    if member is not None and ids == {member}:
        return True
    return _peelable([disagreement(target.terms, instance.events[c]) for c in sorted(ids)])


def is_assignable(target: BadEvent, event_ids: Iterable[int], instance: Instance) -> bool:
    """Check whether a set of event ids is assignable to ``target``."""
    ids = frozenset(event_ids)
    member = _member_id(target, instance)
    if member is not None and ids == {member}:
        return True
    return _matchable([disagreement(target.terms, instance.events[c]) for c in sorted(ids)])


class OrderabilityOracle:
    """Memoized orderability test between instance events.

    Used by the witness-tree builder, which asks the same (parent, children)
    question many times while scanning a log.
    """

    def __init__(self, instance: Instance) -> None:
        self.instance = instance
        self._cached = lru_cache(maxsize=1 << 16)(self._compute)

    def _compute(self, parent: int, children: frozenset[int]) -> bool:
        if children == {parent}:
            return True
        if parent in children:
            return False
        target = self.instance.events[parent]
        return _peelable(
            [disagreement(target.terms, self.instance.events[c]) for c in sorted(children)]
        )

    def is_orderable(self, parent: int, children: frozenset[int]) -> bool:
        return self._cached(parent, children)


# ---------------------------------------------------------------------------
# Right-hand sides
# ---------------------------------------------------------------------------


class _RhsEvaluator:
    """Evaluates one criterion for many targets, caching enumerated families."""

    def __init__(self, instance: Instance, criterion: Criterion) -> None:
        self.instance = instance
        self.criterion = criterion
        self._families: dict[tuple[Term, ...], list[frozenset[int]]] = {}
        self._symmetric: tuple[float, int] | None = None

    def family(self, target: BadEvent) -> list[frozenset[int]]:
        key = target.terms
        if key not in self._families:
            kind = self.criterion.kind
            cap = self.criterion.enumeration_cap
            if kind is CriterionKind.ORDERABLE_EXACT:
                family = list(enumerate_orderable_sets(target, self.instance, cap))
            elif kind is CriterionKind.ASSIGNABLE_EXACT:
                family = list(enumerate_assignable_sets(target, self.instance, cap))
            else:
                relation = self.criterion.effective_relation
                family = list(
                    enumerate_independent_neighbor_sets(target, self.instance, relation, cap)
                )
            self._families[key] = family
        return self._families[key]

    def symmetric_parameters(self) -> tuple[float, int]:
        """(p, d): largest event probability and largest neighbor count."""
        if self._symmetric is None:
            relation = self.criterion.effective_relation
            p = max(self.instance.probabilities, default=0.0)
            d = max(
                (len(_neighbors(event, self.instance, relation)) for event in self.instance.events),
                default=0,
            )
            self._symmetric = (p, d)
        return self._symmetric

    def own_weight(self, target: BadEvent, mu: MuVector) -> float:
        member = _member_id(target, self.instance)
        return 0.0 if member is None else mu[member]

    def evaluate(self, target: BadEvent, mu: MuVector) -> float:
        instance = self.instance
        kind = self.criterion.kind
        probability = event_prob(target, instance.space)
        slack = self.criterion.slack

        if kind is CriterionKind.SYMMETRIC_LLL:
            _, d = self.symmetric_parameters()
            return slack * math.e * probability * (d + 1)

        if kind is CriterionKind.ASYMMETRIC_LLL:
            neighbors = _neighbors(target, instance, self.criterion.effective_relation)
            product = math.prod(1.0 + mu[b] for b in neighbors)
            return slack * probability * (1.0 + self.own_weight(target, mu)) * product

        if kind is CriterionKind.LLLL:
            neighbors = _lopsided_candidates(target, instance)
            product = math.prod(1.0 + mu[b] for b in neighbors)
            return slack * probability * (self.own_weight(target, mu) + product)

        if kind is CriterionKind.LLLL_VARIABLE:
            product = math.prod(
                1.0 + mu[b] for term in target.terms for b in instance.disagreeing(term)
            )
            return slack * probability * (self.own_weight(target, mu) + product)

        if kind is CriterionKind.BLEND_CLOSED_FORM:
            product = math.prod(
                1.0 + math.fsum(mu[b] for b in instance.disagreeing(term)) for term in target.terms
            )
            return slack * probability * (self.own_weight(target, mu) + product)

        if kind is CriterionKind.PEGDEN_VARIABLE:
            product = math.prod(
                1.0 + math.fsum(mu[b] for b in instance.events_on(variable))
                for variable in target.variables
            )
            return slack * probability * product

        family_sum = math.fsum(math.prod(mu[b] for b in subset) for subset in self.family(target))
        if kind is CriterionKind.PEGDEN_GENERAL:
            return slack * probability * (self.own_weight(target, mu) + family_sum)
        # orderable and assignable families already contain {target} when it is a member
        return slack * probability * family_sum


def rhs(target: BadEvent, mu: MuVector, criterion: Criterion, instance: Instance) -> float:
    """Right-hand side of ``criterion`` for ``target``, including the (1 + epsilon) slack.

    Args:
        target: Event of the instance, or an outside atomic event
        mu: Weights of the instance events
        criterion: Criterion kind and options
        instance: Instance supplying neighbors and probabilities

    Returns:
        The right-hand side value

    Raises:
        EnumerationCapError: If an exact kind enumerates too many subsets
    """
    _check_length(mu, instance)
    return _RhsEvaluator(instance, criterion).evaluate(target, mu)


def _check_length(mu: MuVector, instance: Instance) -> None:
    if len(mu) != instance.m:
        raise ValueError(f"Weight vector has {len(mu)} entries, instance has {instance.m} events")


def check(
    instance: Instance,
    mu: MuVector,
    criterion: Criterion,
    tolerance: float = CHECK_TOLERANCE,
) -> CriterionReport:
    """Check ``mu(B) >= rhs(B)`` for every event.

    The symmetric kind is not weight based: every event is compared as
    ``1 >= (1 + epsilon) e P(B) (d + 1)`` and the weights are only reported.

    Args:
        instance: Instance to check
        mu: Candidate weights
        criterion: Criterion kind and options
        tolerance: Relative tolerance of each comparison

    Returns:
        Report with per-event records and W
    """
    _check_length(mu, instance)
    evaluator = _RhsEvaluator(instance, criterion)
    report = CriterionReport(kind=criterion.kind, epsilon=criterion.epsilon)

    symmetric = criterion.kind is CriterionKind.SYMMETRIC_LLL
    if symmetric:
        p, d = evaluator.symmetric_parameters()
        report.details.update({"p": p, "d": d, "e_p_d_plus_1": math.e * p * (d + 1)})

    for event in instance.events:
        value = evaluator.evaluate(event, mu)
        lhs = 1.0 if symmetric else mu[event.id]
        ok = lhs >= value - tolerance * max(1.0, abs(value))
        report.events.append(
            EventCheck(
                id=event.id, mu=mu[event.id], rhs=value, ok=ok, lhs=lhs if symmetric else None
            )
        )

    logger.info(
        f"Criterion {criterion.kind.value} (epsilon={criterion.epsilon}): "
        f"{'satisfied' if report.satisfied else f'{len(report.failing)} events fail'}"
    )
    return report


def find_mu_fixed_point(
    instance: Instance,
    criterion: Criterion,
    max_iters: int = DEFAULT_MAX_ITERS,
    cap: float = DEFAULT_DIVERGENCE_CAP,
    tolerance: float = CONVERGENCE_TOLERANCE,
) -> MuVector:
    """Search for weights satisfying ``criterion`` by monotone iteration.

    Starts from mu(B) = (1 + epsilon) P(B) and repeatedly replaces every weight
    by its right-hand side. Iterates increase monotonically, so the first
    fixed point reached is the least one.

    Convergence is declared when no weight moves by more than ``tolerance``
    times max(1, mu(B)), which is absolute below 1 and relative above it.

    Args:
        instance: Instance to weight
        criterion: Weight-based criterion
        max_iters: Iteration budget
        cap: Any weight above this is treated as divergence
        tolerance: Convergence threshold on the largest change, relative to max(1, mu)

    Returns:
        Converged weights, which satisfy ``check``

    Raises:
        MuNotFoundError: On divergence or when the iteration budget is spent
        ValueError: For the symmetric kind, which has no weights
    """
    if criterion.kind is CriterionKind.SYMMETRIC_LLL:
        raise ValueError("The symmetric criterion is not weight based; use check() instead")

    evaluator = _RhsEvaluator(instance, criterion)
    current = MuVector.of(criterion.slack * p for p in instance.probabilities)
    if instance.m == 0:
        return current

    for iteration in range(1, max_iters + 1):
        values = [evaluator.evaluate(event, current) for event in instance.events]
        worst = max(values)
        if not math.isfinite(worst) or worst > cap:
            logger.info(f"Weight search diverged at iteration {iteration} (max weight {worst:.3g})")
            raise MuNotFoundError(f"weights exceeded cap {cap:g}", iteration, current)
        updated = MuVector.of(values)
        change = max(
            abs(new - old) / max(1.0, abs(new))
            for new, old in zip(updated.values, current.values, strict=True)
        )
        current = updated
        if change < tolerance:
            logger.info(
                f"Weight search converged after {iteration} iterations, W={current.total:.6g}"
            )
            return current

    raise MuNotFoundError(f"no convergence within {max_iters} iterations", max_iters, current)
