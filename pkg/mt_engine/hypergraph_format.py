"""Text format for capacitated hypergraphs.

Grammar (``#`` comments and blank lines ignored, vertices 0-based)::

    v <count>            # exactly once, first directive
    cap <v> <C>          # optional, at most once per vertex
    edge <v1> <v2> ...   # one hyperedge per line, indices assigned in order

Vertices without a ``cap`` line get capacity 1. Hypergraph-coloring inputs use
the same format and simply omit capacities.
"""

import logging
from pathlib import Path

from mt_engine.instance_format import InputFormatError
from mt_engine.vcmep import CapacitatedHypergraph

logger = logging.getLogger(__name__)

DEFAULT_CAPACITY = 1


class HypergraphFormatError(InputFormatError):
    """Exception raised when hypergraph text cannot be parsed."""

    pass


def _ints(tokens: list[str], line_number: int) -> list[int]:
    try:
        return [int(token) for token in tokens]
    except ValueError as e:
        raise HypergraphFormatError(line_number, f"expected integers, got {tokens}") from e


def parse_hypergraph(text: str) -> CapacitatedHypergraph:
    """Parse hypergraph text.

    Raises:
        HypergraphFormatError: If the text is malformed
        HypergraphError: If the parsed hypergraph violates its invariants
    """
    count: int | None = None
    capacities: dict[int, int] = {}
    edges: list[tuple[int, ...]] = []

    for line_number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword, args = tokens[0], tokens[1:]

        if keyword == "v":
            if count is not None:
                raise HypergraphFormatError(line_number, "duplicate 'v' header")
            values = _ints(args, line_number)
            if len(values) != 1 or values[0] < 0:
                raise HypergraphFormatError(line_number, "'v' takes one nonnegative count")
            count = values[0]
            continue
        if count is None:
            raise HypergraphFormatError(line_number, f"'{keyword}' before 'v' header")

        values = _ints(args, line_number)
        if any(not 0 <= vertex < count for vertex in (values[:1] if keyword == "cap" else values)):
            raise HypergraphFormatError(line_number, f"vertex out of range 0..{count - 1}")
        if keyword == "cap":
            if len(values) != 2:
                raise HypergraphFormatError(line_number, "'cap' takes a vertex and a capacity")
            if values[0] in capacities:
                raise HypergraphFormatError(line_number, f"duplicate capacity for {values[0]}")
            capacities[values[0]] = values[1]
        elif keyword == "edge":
            if not values:
                raise HypergraphFormatError(line_number, "empty edge")
            if len(set(values)) != len(values):
                raise HypergraphFormatError(line_number, "edge repeats a vertex")
            edges.append(tuple(values))
        else:
            raise HypergraphFormatError(line_number, f"unknown directive '{keyword}'")

    if count is None:
        raise HypergraphFormatError(0, "missing 'v' header")
    hypergraph = CapacitatedHypergraph(
        n_vertices=count,
        edges=tuple(edges),
        capacities=tuple(capacities.get(v, DEFAULT_CAPACITY) for v in range(count)),
    )
    logger.info(f"Parsed hypergraph: {count} vertices, {len(edges)} edges")
    return hypergraph


def load_hypergraph(path: Path) -> CapacitatedHypergraph:
    return parse_hypergraph(path.read_text(encoding="utf-8"))


def dump_hypergraph(hypergraph: CapacitatedHypergraph, capacities: bool = True) -> str:
    lines = [f"v {hypergraph.n_vertices}"]
    if capacities:
        lines.extend(f"cap {v} {c}" for v, c in enumerate(hypergraph.capacities))
    lines.extend("edge " + " ".join(str(v) for v in edge) for edge in hypergraph.edges)
    return "\n".join(lines) + "\n"
