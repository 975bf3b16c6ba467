"""DIMACS CNF reading and writing.

Comment lines start with ``c``, the header is ``p cnf <vars> <clauses>``, and
every clause is a run of nonzero literals closed by ``0``; a clause may span
several lines. A ``%`` line ends the input.
"""

import logging
from dataclasses import dataclass
from pathlib import Path

from mt_engine.instance_format import InputFormatError

logger = logging.getLogger(__name__)


class DimacsFormatError(InputFormatError):
    """Exception raised when DIMACS CNF text cannot be parsed."""

    pass


@dataclass(frozen=True)
class Cnf:
    """A CNF formula over variables ``1..n_vars``."""

    n_vars: int
    clauses: tuple[tuple[int, ...], ...]

    @property
    def m(self) -> int:
        return len(self.clauses)

    def occurrences(self) -> list[int]:
        """Number of clauses each variable occurs in, indexed from 0."""
        counts = [0] * self.n_vars
        for clause in self.clauses:
            for literal in clause:
                counts[abs(literal) - 1] += 1
        return counts

    def is_satisfied(self, assignment: list[int]) -> bool:
        """Check a 0/1 assignment indexed from 0."""
        return all(
            any((assignment[abs(lit) - 1] == 1) == (lit > 0) for lit in clause)
            for clause in self.clauses
        )


def parse_dimacs(text: str) -> Cnf:
    """Parse DIMACS CNF text.

    Raises:
        DimacsFormatError: On a missing or malformed header, a non-integer
            token, or a literal outside ``1..n_vars``
    """
    n_vars: int | None = None
    declared = 0
    clauses: list[tuple[int, ...]] = []
    current: list[int] = []
    line_number = 0

    for line_number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("%"):
            break
        if line.startswith("p"):
            parts = line.split()
            if n_vars is not None:
                raise DimacsFormatError(line_number, "duplicate 'p' header")
            if len(parts) != 4 or parts[1] != "cnf":
                raise DimacsFormatError(line_number, "header must be 'p cnf <vars> <clauses>'")
            try:
                n_vars, declared = int(parts[2]), int(parts[3])
            except ValueError as e:
                raise DimacsFormatError(line_number, "header counts must be integers") from e
            if n_vars < 0 or declared < 0:
                raise DimacsFormatError(line_number, "header counts must be nonnegative")
            continue
        if n_vars is None:
            raise DimacsFormatError(line_number, "clause before 'p cnf' header")

        for token in line.split():
            try:
                literal = int(token)
            except ValueError as e:
                raise DimacsFormatError(line_number, f"invalid literal '{token}'") from e
            if literal == 0:
                clauses.append(tuple(current))
                current = []
            elif abs(literal) > n_vars:
                raise DimacsFormatError(
                    line_number, f"literal {literal} outside variables 1..{n_vars}"
                )
            else:
                current.append(literal)

    if n_vars is None:
        raise DimacsFormatError(line_number, "missing 'p cnf' header")
    if current:
        logger.warning("Last clause is not terminated by 0; keeping it")
        clauses.append(tuple(current))
    if len(clauses) != declared:
        logger.warning(f"Header declares {declared} clauses, found {len(clauses)}")

    logger.info(f"Parsed CNF: {n_vars} variables, {len(clauses)} clauses")
    return Cnf(n_vars=n_vars, clauses=tuple(clauses))


def load_dimacs(path: Path) -> Cnf:
    return parse_dimacs(path.read_text(encoding="utf-8"))


def dump_dimacs(cnf: Cnf, comment: str | None = None) -> str:
    lines = [f"c {comment}"] if comment else []
    lines.append(f"p cnf {cnf.n_vars} {cnf.m}")
    lines.extend(" ".join(str(lit) for lit in clause) + " 0" for clause in cnf.clauses)
    return "\n".join(lines) + "\n"
