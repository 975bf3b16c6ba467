"""Instance model for the variable-assignment Lopsided Local Lemma.

This module defines variable spaces with finite domains and product
probabilities, atomic bad-events, the lopsidependency relation between them,
and instance validation. Everything downstream (criteria, resampling, witness
trees, applications) speaks this vocabulary.
"""

import logging
import math
from bisect import bisect_right
from collections import defaultdict
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from itertools import accumulate
from typing import Any

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-12

Term = tuple[int, int]
Assignment = list[int]


class InstanceError(Exception):
    """Base exception for malformed variable spaces and instances."""

    pass


class StructuralError(InstanceError):
    """Exception raised when an event refers to a variable outside the assignment."""

    pass


class InstanceValidationError(InstanceError):
    """Exception raised when a strict instance fails validation."""

    def __init__(self, report: "ValidationReport") -> None:
        self.report = report
        summary = "; ".join(issue.message for issue in report.issues[:5])
        super().__init__(f"Instance failed validation ({len(report.issues)} issues): {summary}")


@dataclass(frozen=True)
class VariableSpace:
    """Independent discrete variables with per-value probabilities.

    Attributes:
        domains: Value set of every variable, in sampling order
        probs: Probability of each domain value, aligned with ``domains``
    """

    domains: tuple[tuple[int, ...], ...]
    probs: tuple[tuple[float, ...], ...]

    @property
    def n(self) -> int:
        """Number of variables."""
        return len(self.domains)

    @cached_property
    def _value_index(self) -> tuple[dict[int, int], ...]:
        return tuple({value: k for k, value in enumerate(domain)} for domain in self.domains)

    @cached_property
    def _cdfs(self) -> tuple[tuple[float, ...], ...]:
        return tuple(tuple(accumulate(p)) for p in self.probs)

    def contains(self, variable: int, value: int) -> bool:
        """Check whether ``value`` is in the domain of ``variable``."""
        return 0 <= variable < self.n and value in self._value_index[variable]

    def probability(self, variable: int, value: int) -> float:
        """Return P(X_variable = value), zero for values outside the domain."""
        index = self._value_index[variable].get(value)
        return 0.0 if index is None else self.probs[variable][index]

    def sample(self, variable: int, u: float) -> int:
        """Map a uniform draw in [0, 1) to a domain value by inverse CDF.

        Args:
            variable: Variable index
            u: Uniform draw

        Returns:
            The domain value whose CDF interval contains ``u``
        """
        cdf = self._cdfs[variable]
        index = min(bisect_right(cdf, u), len(cdf) - 1)
        # zero-probability values at the top end must never be returned
        while index > 0 and self.probs[variable][index] == 0.0:
            index -= 1
        return self.domains[variable][index]

    @classmethod
    def uniform(cls, n: int, domain_size: int = 2) -> "VariableSpace":
        """Create ``n`` variables uniform over ``0..domain_size-1``."""
        domain = tuple(range(domain_size))
        probs = tuple(1.0 / domain_size for _ in domain)
        return cls(domains=(domain,) * n, probs=(probs,) * n)

    @classmethod
    def boolean(cls, p_true: Sequence[float]) -> "VariableSpace":
        """Create boolean variables (0 = false, 1 = true) with the given P(true)."""
        return cls(
            domains=tuple((0, 1) for _ in p_true),
            probs=tuple((1.0 - p, p) for p in p_true),
        )


@dataclass(frozen=True)
class BadEvent:
    """Atomic conjunction of variable-value demands.

    Attributes:
        id: Position of the event in its instance
        terms: (variable, value) pairs sorted by variable
    """

    id: int
    terms: tuple[Term, ...]

    @classmethod
    def of(cls, event_id: int, terms: Iterable[Term]) -> "BadEvent":
        """Create an event with its terms in canonical order."""
        return cls(id=event_id, terms=tuple(sorted((int(i), int(j)) for i, j in terms)))

    @cached_property
    def demands(self) -> dict[int, int]:
        """Map variable -> demanded value."""
        return dict(self.terms)

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(i for i, _ in self.terms)

    def __len__(self) -> int:
        return len(self.terms)


def is_true(event: BadEvent, assignment: Sequence[int]) -> bool:
    """Check whether every demand of ``event`` holds under ``assignment``.

    Raises:
        StructuralError: If the event names a variable outside the assignment
    """
    for variable, value in event.terms:
        if not 0 <= variable < len(assignment):
            raise StructuralError(
                f"Event {event.id} refers to variable {variable}, "
                f"assignment has {len(assignment)} variables"
            )
        if assignment[variable] != value:
            return False
    return True


def lopsidependent(b1: BadEvent, b2: BadEvent) -> bool:
    """Check whether two events demand different values of a shared variable."""
    demands = b2.demands
    return any(variable in demands and demands[variable] != value for variable, value in b1.terms)


def event_prob(event: BadEvent, space: VariableSpace) -> float:
    """Probability of ``event`` under the product measure of ``space``."""
    return math.prod(space.probability(i, j) for i, j in event.terms)


def disagreement(target_terms: Iterable[Term], event: BadEvent) -> frozenset[Term]:
    """Terms of the target that ``event`` contradicts."""
    demands = event.demands
    return frozenset((i, j) for i, j in target_terms if i in demands and demands[i] != j)


class IssueKind(Enum):
    """Kinds of instance validation failures."""

    EMPTY_EVENT = "empty_event"
    DUPLICATE_VARIABLE = "duplicate_variable"
    VALUE_OUT_OF_DOMAIN = "value_out_of_domain"
    VARIABLE_OUT_OF_RANGE = "variable_out_of_range"
    NOT_NORMALIZED = "not_normalized"
    NEGATIVE_PROBABILITY = "negative_probability"
    EMPTY_DOMAIN = "empty_domain"
    ID_MISMATCH = "id_mismatch"
    INDEX_INCONSISTENT = "index_inconsistent"


@dataclass
class ValidationIssue:
    """A single violated instance invariant."""

    kind: IssueKind
    message: str
    event_ids: list[int] = field(default_factory=list)
    variable: int | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "kind": self.kind.value,
            "message": self.message,
            "event_ids": list(self.event_ids),
            "variable": self.variable,
        }


@dataclass
class ValidationReport:
    """Result of checking an instance against its invariants."""

    issues: list[ValidationIssue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.issues

    def add(self, kind: IssueKind, message: str, **details: Any) -> None:
        self.issues.append(ValidationIssue(kind=kind, message=message, **details))

    def to_dict(self) -> dict[str, Any]:
        return {"ok": self.ok, "issues": [issue.to_dict() for issue in self.issues]}


class Instance:
    """A variable space together with its atomic bad-events.

    The lopsidependency relation, the dependency relation and the
    per-(variable, value) disagreement index are built once here; the instance
    is immutable afterwards and safe to share between threads.
    """

    def __init__(
        self, space: VariableSpace, events: Sequence[BadEvent], strict: bool = True
    ) -> None:
        """Initialize the instance and its indexes.

        Args:
            space: Variable space
            events: Bad-events; ``events[k].id`` must equal ``k``
            strict: Raise on validation failure instead of deferring to ``validate``

        Raises:
            InstanceValidationError: If ``strict`` and the instance is malformed
        """
        self.space = space
        self.events: tuple[BadEvent, ...] = tuple(events)
        self._build_indexes()

        if strict:
            report = validate(self)
            if not report.ok:
                raise InstanceValidationError(report)

        logger.debug(f"Instance built: n={self.n}, m={self.m}")

    @classmethod
    def from_terms(
        cls, space: VariableSpace, events: Iterable[Iterable[Term]], strict: bool = True
    ) -> "Instance":
        """Build an instance, numbering events in the given order."""
        return cls(
            space, [BadEvent.of(k, terms) for k, terms in enumerate(events)], strict=strict
        )

    def _build_indexes(self) -> None:
        events_with: dict[Term, list[int]] = defaultdict(list)
        events_on_var: dict[int, list[int]] = defaultdict(list)
        # indexes are keyed by position; validate() reports ids that disagree with it
        for position, event in enumerate(self.events):
            for variable in dict.fromkeys(event.variables):
                events_on_var[variable].append(position)
            for term in dict.fromkeys(event.terms):
                events_with[term].append(position)

        self._events_with = {term: tuple(ids) for term, ids in events_with.items()}
        self._events_on_var = {var: tuple(ids) for var, ids in events_on_var.items()}
        self._disagreeing = {
            term: self._compute_disagreeing(term) for term in self._events_with
        }

        lopsided: list[set[int]] = [set() for _ in self.events]
        dependent: list[set[int]] = [set() for _ in self.events]
        for position, event in enumerate(self.events):
            for term in event.terms:
                lopsided[position].update(self._disagreeing[term])
            for variable in event.variables:
                dependent[position].update(self._events_on_var[variable])
            dependent[position].discard(position)
            lopsided[position].discard(position)

        self._lopsided = tuple(frozenset(s) for s in lopsided)
        self._dependent = tuple(frozenset(s) for s in dependent)

    def _compute_disagreeing(self, term: Term) -> tuple[int, ...]:
        variable, value = term
        agreeing = set(self._events_with.get(term, ()))
        return tuple(
            event_id
            for event_id in self._events_on_var.get(variable, ())
            if event_id not in agreeing
        )

    @property
    def n(self) -> int:
        return self.space.n

    @property
    def m(self) -> int:
        return len(self.events)

    @cached_property
    def max_event_size(self) -> int:
        return max((len(event) for event in self.events), default=0)

    @cached_property
    def probabilities(self) -> tuple[float, ...]:
        """P(B) for every event, by id."""
        return tuple(event_prob(event, self.space) for event in self.events)

    def events_with(self, term: Term) -> tuple[int, ...]:
        """Ids of events demanding exactly ``term``."""
        return self._events_with.get(term, ())

    def events_on(self, variable: int) -> tuple[int, ...]:
        """Ids of events involving ``variable``."""
        return self._events_on_var.get(variable, ())

    def disagreeing(self, term: Term) -> tuple[int, ...]:
        """Ids of events demanding a different value of the variable of ``term``."""
        cached = self._disagreeing.get(term)
        return cached if cached is not None else self._compute_disagreeing(term)

    def lopsided_neighbors(self, event_id: int) -> frozenset[int]:
        """Events lopsidependent with ``event_id`` (never the event itself)."""
        return self._lopsided[event_id]

    def dependent_neighbors(self, event_id: int) -> frozenset[int]:
        """Events sharing a variable with ``event_id``, excluding itself."""
        return self._dependent[event_id]

    def lopsidependent(self, id1: int, id2: int) -> bool:
        return id2 in self._lopsided[id1]

    def neighbors(self, event_id: int, lopsided: bool = True) -> frozenset[int]:
        """Neighbors under lopsidependency, or under plain dependency."""
        return self._lopsided[event_id] if lopsided else self._dependent[event_id]

    def dependent(self, id1: int, id2: int) -> bool:
        """Classical dependency: the two distinct events share a variable."""
        return id2 in self._dependent[id1]

    def find_event(self, terms: Iterable[Term]) -> int | None:
        """Return the id of an event with exactly these terms, if any."""
        wanted = frozenset(terms)
        for event in self.events:
            if frozenset(event.terms) == wanted:
                return event.id
        return None

    def true_events(self, assignment: Sequence[int]) -> list[int]:
        """Ids of all events true under ``assignment``."""
        return [event.id for event in self.events if is_true(event, assignment)]

    def __repr__(self) -> str:
        return f"Instance(n={self.n}, m={self.m})"


def validate(instance: Instance) -> ValidationReport:
    """Check every instance invariant and report each violation.

    Besides the type invariants this confirms, for every lopsidependent pair,
    that the two events disagree on a shared variable and so are mutually
    exclusive, and that the disagreement index matches the events.

    Args:
        instance: Instance to check (built with ``strict=False`` to inspect bad input)

    Returns:
        Report listing every violation with the offending event ids
    """
    report = ValidationReport()
    _check_space(instance.space, report)
    _check_events(instance, report)
    if not any(issue.kind is IssueKind.ID_MISMATCH for issue in report.issues):
        _check_relation(instance, report)

    if report.ok:
        logger.debug(f"Validated instance with {instance.m} events")
    else:
        logger.info(f"Instance validation found {len(report.issues)} issues")
    return report


def _check_space(space: VariableSpace, report: ValidationReport) -> None:
    if len(space.probs) != len(space.domains):
        report.add(IssueKind.NOT_NORMALIZED, "Domains and probability vectors differ in count")

    for variable, (domain, probs) in enumerate(zip(space.domains, space.probs, strict=False)):
        if not domain:
            report.add(
                IssueKind.EMPTY_DOMAIN,
                f"Variable {variable} has an empty domain",
                variable=variable,
            )
            continue
        if len(probs) != len(domain):
            report.add(
                IssueKind.NOT_NORMALIZED,
                f"Variable {variable} has {len(domain)} values but {len(probs)} probabilities",
                variable=variable,
            )
            continue
        if any(p < 0 for p in probs):
            report.add(
                IssueKind.NEGATIVE_PROBABILITY,
                f"Variable {variable} has a negative probability",
                variable=variable,
            )
        total = math.fsum(probs)
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            report.add(
                IssueKind.NOT_NORMALIZED,
                f"Probabilities of variable {variable} sum to {total!r}, not 1",
                variable=variable,
            )


def _check_events(instance: Instance, report: ValidationReport) -> None:
    space = instance.space
    for position, event in enumerate(instance.events):
        if event.id != position:
            report.add(
                IssueKind.ID_MISMATCH,
                f"Event at position {position} carries id {event.id}",
                event_ids=[event.id],
            )
        if not event.terms:
            report.add(IssueKind.EMPTY_EVENT, f"Event {event.id} is empty", event_ids=[event.id])
            continue

        seen: dict[int, int] = {}
        for variable, value in event.terms:
            if not 0 <= variable < space.n:
                report.add(
                    IssueKind.VARIABLE_OUT_OF_RANGE,
                    f"Event {event.id} refers to unknown variable {variable}",
                    event_ids=[event.id],
                    variable=variable,
                )
                continue
            if variable in seen:
                report.add(
                    IssueKind.DUPLICATE_VARIABLE,
                    f"Event {event.id} demands variable {variable} twice "
                    f"(values {seen[variable]} and {value}): contradictory atomic event",
                    event_ids=[event.id],
                    variable=variable,
                )
            seen[variable] = value
            if not space.contains(variable, value):
                report.add(
                    IssueKind.VALUE_OUT_OF_DOMAIN,
                    f"Event {event.id} demands value {value} outside the domain "
                    f"of variable {variable}",
                    event_ids=[event.id],
                    variable=variable,
                )


def _check_relation(instance: Instance, report: ValidationReport) -> None:
    for event in instance.events:
        for other_id in sorted(instance.lopsided_neighbors(event.id)):
            other = instance.events[other_id]
            if not lopsidependent(event, other):
                report.add(
                    IssueKind.INDEX_INCONSISTENT,
                    f"Events {event.id} and {other_id} are indexed as lopsidependent "
                    "but disagree on no shared variable",
                    event_ids=[event.id, other_id],
                )
            if event.id not in instance.lopsided_neighbors(other_id):
                report.add(
                    IssueKind.INDEX_INCONSISTENT,
                    f"Lopsidependency between {event.id} and {other_id} is not symmetric",
                    event_ids=[event.id, other_id],
                )
        for variable, value in event.terms:
            for other_id in instance.disagreeing((variable, value)):
                demanded = instance.events[other_id].demands.get(variable)
                if demanded is None or demanded == value:
                    report.add(
                        IssueKind.INDEX_INCONSISTENT,
                        f"Disagreement index for ({variable},{value}) lists event {other_id}",
                        event_ids=[event.id, other_id],
                    )
