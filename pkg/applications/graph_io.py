"""Edge-list text format for graph inputs.

Grammar (``#`` comments and blank lines ignored, vertices are nonnegative integers)::

    n <count>            # optional; declares vertices 0..count-1, including isolated ones
    <u> <v>              # one undirected edge per line
    class <v1> <v2> ...  # optional vertex class of a partition
    cycle <v0> <v1> ...  # optional Hamiltonian cycle, closing edge implied
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path

import networkx as nx

from mt_engine.instance_format import InputFormatError

logger = logging.getLogger(__name__)


class GraphFormatError(InputFormatError):
    """Exception raised when edge-list text cannot be parsed."""

    pass


@dataclass
class GraphInput:
    graph: nx.Graph
    classes: list[list[int]] = field(default_factory=list)
    cycle: list[int] = field(default_factory=list)


def _vertices(tokens: list[str], line_number: int) -> list[int]:
    try:
        values = [int(token) for token in tokens]
    except ValueError as e:
        raise GraphFormatError(line_number, f"expected vertex numbers, got {tokens}") from e
    if any(v < 0 for v in values):
        raise GraphFormatError(line_number, "vertex numbers must be nonnegative")
    return values


def parse_graph(text: str) -> GraphInput:
    """Parse edge-list text.

    Raises:
        GraphFormatError: On malformed lines, self-loops, a repeated ``cycle``
            directive, or vertices beyond a declared ``n``
    """
    graph = nx.Graph()
    parsed = GraphInput(graph=graph)
    declared: int | None = None

    for line_number, raw in enumerate(text.splitlines(), start=1):
        tokens = raw.split("#", 1)[0].split()
        if not tokens:
            continue
        keyword = tokens[0]
        if keyword == "n":
            values = _vertices(tokens[1:], line_number)
            if len(values) != 1 or declared is not None:
                raise GraphFormatError(line_number, "'n' takes one count and appears once")
            declared = values[0]
            graph.add_nodes_from(range(declared))
            continue
        if keyword == "class":
            members = _vertices(tokens[1:], line_number)
            if not members:
                raise GraphFormatError(line_number, "empty class")
            parsed.classes.append(members)
            graph.add_nodes_from(members)
            line_vertices = members
        elif keyword == "cycle":
            if parsed.cycle:
                raise GraphFormatError(line_number, "duplicate 'cycle'")
            parsed.cycle = _vertices(tokens[1:], line_number)
            line_vertices = parsed.cycle
        else:
            values = _vertices(tokens, line_number)
            if len(values) != 2:
                raise GraphFormatError(line_number, "edge lines hold exactly two vertices")
            if values[0] == values[1]:
                raise GraphFormatError(line_number, f"self-loop at {values[0]}")
            graph.add_edge(values[0], values[1])
            line_vertices = values
        if declared is not None and any(v >= declared for v in line_vertices):
            raise GraphFormatError(line_number, f"vertex outside 0..{declared - 1}")

    logger.info(
        f"Parsed graph: {graph.number_of_nodes()} vertices, {graph.number_of_edges()} edges"
    )
    return parsed


def load_graph(path: Path) -> GraphInput:
    return parse_graph(path.read_text(encoding="utf-8"))


def dump_graph(
    graph: nx.Graph, classes: list[list[int]] | None = None, cycle: list[int] | None = None
) -> str:
    lines = [f"n {graph.number_of_nodes()}"]
    lines.extend(f"{u} {v}" for u, v in sorted(tuple(sorted(e)) for e in graph.edges))
    for members in classes or []:
        lines.append("class " + " ".join(map(str, members)))
    if cycle:
        lines.append("cycle " + " ".join(map(str, cycle)))
    return "\n".join(lines) + "\n"
