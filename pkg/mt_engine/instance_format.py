"""Line-oriented text format for instances.

Grammar (one directive per line, ``#`` starts a comment, blank lines ignored)::

    vars <n>                       # exactly once, before any other directive
    dom <i> <v1>:<p1> <v2>:<p2>    # exactly once per variable 0..n-1
    ev (<i1>,<j1>) (<i2>,<j2>) ... # one bad-event per line, ids assigned in order

Variable indices are 0-based. Values are integers; probabilities are decimal
numbers or fractions such as ``1/3``. Whitespace inside a ``(i,j)`` pair is
allowed.
"""

import logging
import re
from fractions import Fraction
from pathlib import Path

from mt_engine.model import BadEvent, Instance, InstanceError, Term, VariableSpace

logger = logging.getLogger(__name__)

_PAIR = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


class InputFormatError(Exception):
    """Base exception for malformed text input, carrying the offending line."""

    def __init__(self, line_number: int, message: str) -> None:
        self.line_number = line_number
        self.detail = message
        super().__init__(f"line {line_number}: {message}")


class InstanceFormatError(InputFormatError, InstanceError):
    """Exception raised when instance text cannot be parsed."""

    pass


def _parse_probability(token: str, line_number: int) -> float:
    try:
        value = float(Fraction(token))
    except (ValueError, ZeroDivisionError) as e:
        raise InstanceFormatError(line_number, f"invalid probability '{token}'") from e
    return value


def _parse_int(token: str, line_number: int, what: str) -> int:
    try:
        return int(token)
    except ValueError as e:
        raise InstanceFormatError(line_number, f"invalid {what} '{token}'") from e


def parse_terms(text: str, line_number: int = 0) -> list[Term]:
    """Parse a run of ``(i,j)`` pairs such as ``(0,1) (2,0)``."""
    if _PAIR.sub("", text).strip():
        raise InstanceFormatError(line_number, f"malformed event terms '{text}'")
    return [(int(i), int(j)) for i, j in _PAIR.findall(text)]


def parse_instance(text: str, strict: bool = True) -> Instance:
    """Parse instance text.

    Args:
        text: Instance text in the documented grammar
        strict: Validate the instance and raise on semantic violations

    Returns:
        Parsed instance

    Raises:
        InstanceFormatError: If the text is syntactically malformed
        InstanceValidationError: If ``strict`` and the instance is invalid
    """
    n: int | None = None
    domains: dict[int, tuple[tuple[int, ...], tuple[float, ...]]] = {}
    events: list[list[Term]] = []

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        keyword, _, rest = line.partition(" ")
        rest = rest.strip()

        if keyword == "vars":
            if n is not None:
                raise InstanceFormatError(line_number, "duplicate 'vars' header")
            n = _parse_int(rest, line_number, "variable count")
            if n < 0:
                raise InstanceFormatError(line_number, "variable count must be nonnegative")
            continue

        if n is None:
            raise InstanceFormatError(line_number, f"'{keyword}' before 'vars' header")

        if keyword == "dom":
            tokens = rest.split()
            if not tokens:
                raise InstanceFormatError(line_number, "'dom' needs a variable index")
            variable = _parse_int(tokens[0], line_number, "variable index")
            if not 0 <= variable < n:
                raise InstanceFormatError(line_number, f"variable {variable} out of range")
            if variable in domains:
                raise InstanceFormatError(line_number, f"duplicate domain for variable {variable}")
            values: list[int] = []
            probs: list[float] = []
            for token in tokens[1:]:
                value_text, sep, prob_text = token.partition(":")
                if not sep:
                    raise InstanceFormatError(line_number, f"expected value:prob, got '{token}'")
                values.append(_parse_int(value_text, line_number, "domain value"))
                probs.append(_parse_probability(prob_text, line_number))
            if len(set(values)) != len(values):
                raise InstanceFormatError(line_number, f"repeated value in domain of {variable}")
            domains[variable] = (tuple(values), tuple(probs))
        elif keyword == "ev":
            events.append(parse_terms(rest, line_number))
        else:
            raise InstanceFormatError(line_number, f"unknown directive '{keyword}'")

    if n is None:
        raise InstanceFormatError(0, "missing 'vars' header")
    missing = [i for i in range(n) if i not in domains]
    if missing:
        raise InstanceFormatError(0, f"no 'dom' line for variables {missing[:10]}")

    space = VariableSpace(
        domains=tuple(domains[i][0] for i in range(n)),
        probs=tuple(domains[i][1] for i in range(n)),
    )
    instance = Instance(
        space, [BadEvent.of(k, terms) for k, terms in enumerate(events)], strict=strict
    )
    logger.info(f"Parsed instance: {instance.n} variables, {instance.m} events")
    return instance


def load_instance(path: Path, strict: bool = True) -> Instance:
    """Read and parse an instance file."""
    return parse_instance(path.read_text(encoding="utf-8"), strict=strict)


def dump_instance(instance: Instance) -> str:
    """Serialize an instance in the text format (round-trips through ``parse_instance``)."""
    lines = [f"vars {instance.n}"]
    for variable, (domain, probs) in enumerate(
        zip(instance.space.domains, instance.space.probs, strict=True)
    ):
        entries = " ".join(f"{value}:{prob!r}" for value, prob in zip(domain, probs, strict=True))
        lines.append(f"dom {variable} {entries}")
    for event in instance.events:
        lines.append("ev " + " ".join(f"({i},{j})" for i, j in event.terms))
    return "\n".join(lines) + "\n"
