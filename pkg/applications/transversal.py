"""Independent transversals of partitioned graphs.

The vertices are split into classes of equal size ``b``; each class chooses
one vertex uniformly and every graph edge between two classes is a bad-event
(both endpoints chosen). With maximum degree ``Delta`` a uniform weight
exists exactly when ``b >= 4 Delta - 1``.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Any

import networkx as nx

from applications import ApplicationInputError
from mt_engine.model import Instance, VariableSpace
from mt_engine.randomness import KeyedStreams, Purpose

logger = logging.getLogger(__name__)


@dataclass
class TransversalConfig:
    """A partitioned graph and the weight of its edge events.

    Attributes:
        graph: Graph on the partitioned vertices
        classes: Vertex classes, each of size ``b``
        b: Class size
        max_degree: Maximum vertex degree over cross-class edges
        alpha: Uniform weight, ``None`` when no weight exists
        edges: Cross-class edges, one per event in event order
    """

    graph: nx.Graph
    classes: list[list[int]]
    b: int
    max_degree: int
    alpha: float | None
    edges: list[tuple[int, int]]

    def to_dict(self) -> dict[str, Any]:
        return {
            "classes": len(self.classes),
            "b": self.b,
            "max_degree": self.max_degree,
            "alpha": self.alpha,
            "edges": len(self.edges),
            "threshold": transversal_threshold(self.max_degree),
        }


def transversal_threshold(max_degree: int) -> int:
    """Smallest class size ``4 Delta - 1`` with a feasible weight."""
    return 4 * max_degree - 1


def transversal_alpha(b: int, max_degree: int) -> float | None:
    """Least ``alpha`` with ``alpha >= b^{-2} (alpha + (1 + (b-1) Delta alpha)^2)``.

    With ``D = (b-1) Delta`` this is the smaller root of
    ``D^2 a^2 + (2D + 1 - b^2) a + 1 = 0``; the discriminant is computed in
    integers so the boundary ``b = 4 Delta - 1`` is exact.

    Returns:
        The weight, or ``None`` when ``b < 4 Delta - 1``
    """
    if b < 1 or max_degree < 0:
        raise ApplicationInputError(f"Need b >= 1 and Delta >= 0, got b={b}, Delta={max_degree}")
    d = (b - 1) * max_degree
    if d == 0:
        return 1.0 / (b * b - 1) if b > 1 else None
    linear = b * b - 1 - 2 * d
    discriminant = linear * linear - 4 * d * d
    if linear <= 0 or discriminant < 0:
        return None
    return (linear - math.sqrt(discriminant)) / (2 * d * d)


def transversal_fixed_point(
    b: int,
    max_degree: int,
    max_iters: int = 1_000_000,
    cap: float = 1e9,
    tolerance: float = 1e-12,
) -> float | None:
    """Least weight by iterating ``alpha <- b^{-2} (alpha + (1 + (b-1) Delta alpha)^2)`` from 0.

    Returns:
        The limit, or ``None`` when the iterates exceed ``cap`` or do not settle
    """
    d = (b - 1) * max_degree
    alpha = 0.0
    for _ in range(max_iters):
        updated = (alpha + (1 + d * alpha) ** 2) / (b * b)
        if updated > cap:
            return None
        if abs(updated - alpha) <= tolerance * max(1.0, updated):
            return updated
        alpha = updated
    return None


def transversal_parallel_factor(b: int, max_degree: int) -> float:
    """Slack ``min(1, 4(b-1)Delta / (b^2 - 4(b-1)Delta))`` available to the parallel run."""
    denominator = b * b - 4 * (b - 1) * max_degree
    if denominator <= 0:
        return math.inf
    return min(1.0, 4 * (b - 1) * max_degree / denominator)


def transversal_build(
    graph: nx.Graph, partition: Sequence[Sequence[int]]
) -> tuple[Instance, TransversalConfig]:
    """Build the edge-inside-transversal instance.

    Variable ``i`` is class ``i`` and its value ``j`` selects the ``j``-th vertex
    of the class. Edges inside one class are dropped with a warning, since a
    transversal never picks both endpoints.

    Raises:
        ApplicationInputError: On unequal or overlapping classes, or graph
            vertices missing from the partition
    """
    classes = [list(cls) for cls in partition]
    if not classes:
        raise ApplicationInputError("Partition has no classes")
    sizes = {len(cls) for cls in classes}
    if len(sizes) != 1 or 0 in sizes:
        raise ApplicationInputError(
            f"Classes must have one common positive size, got {sorted(sizes)}"
        )
    b = sizes.pop()

    owner: dict[int, tuple[int, int]] = {}
    for index, cls in enumerate(classes):
        for position, vertex in enumerate(cls):
            if vertex in owner:
                raise ApplicationInputError(f"Vertex {vertex} appears in two classes")
            owner[vertex] = (index, position)
    missing = [v for v in graph.nodes if v not in owner]
    if missing:
        raise ApplicationInputError(f"Vertices {missing[:5]} are in no class")

    edges: list[tuple[int, int]] = []
    intra = 0
    for u, v in sorted(tuple(sorted(e)) for e in graph.edges):
        if owner[u][0] == owner[v][0]:
            intra += 1
            continue
        edges.append((u, v))
    if intra:
        logger.warning(f"Dropped {intra} edges inside a single class")

    cross = nx.Graph(edges)
    max_degree = max((d for _, d in cross.degree), default=0)
    alpha = transversal_alpha(b, max_degree)
    if alpha is None:
        logger.warning(
            f"No weight exists: b={b} is below the threshold {transversal_threshold(max_degree)}"
        )

    instance = Instance.from_terms(
        VariableSpace.uniform(len(classes), b), ([owner[u], owner[v]] for u, v in edges)
    )
    config = TransversalConfig(
        graph=graph, classes=classes, b=b, max_degree=max_degree, alpha=alpha, edges=edges
    )
    logger.info(f"Built transversal instance: {len(classes)} classes of {b}, Delta={max_degree}")
    return instance, config


def chosen_vertices(config: TransversalConfig, assignment: Sequence[int]) -> list[int]:
    return [cls[value] for cls, value in zip(config.classes, assignment, strict=True)]


def is_independent_transversal(config: TransversalConfig, vertices: Sequence[int]) -> bool:
    chosen = set(vertices)
    return len(chosen) == len(config.classes) and not any(
        u in chosen and v in chosen for u, v in config.edges
    )


def random_partitioned_graph(
    classes: int, b: int, max_degree: int, seed: int
) -> tuple[nx.Graph, list[list[int]]]:
    """Random graph on ``classes * b`` vertices with cross-class edges of degree at most Delta.

    Candidate pairs are shuffled and kept greedily while both endpoints have
    spare degree. Class ``i`` holds vertices ``i*b .. i*b + b - 1``.
    """
    if classes < 2 or b < 1 or max_degree < 0:
        raise ApplicationInputError(
            f"Need at least 2 classes, b >= 1, Delta >= 0; got {classes}, {b}, {max_degree}"
        )
    rng = KeyedStreams(seed).generator(Purpose.SAMPLE, 2)
    n = classes * b
    graph = nx.empty_graph(n)
    pairs = [(u, v) for u in range(n) for v in range(u + 1, n) if u // b != v // b]
    for index in rng.permutation(len(pairs)):
        u, v = pairs[index]
        if graph.degree[u] < max_degree and graph.degree[v] < max_degree:
            graph.add_edge(u, v)
    partition = [list(range(i * b, (i + 1) * b)) for i in range(classes)]
    logger.debug(f"Random partitioned graph: {graph.number_of_edges()} edges")
    return graph, partition
