"""Proper c-coloring of k-uniform hypergraphs with bounded vertex degree.

Each vertex picks a color uniformly; for every edge and every color there is
one bad-event, the edge being monochromatic in that color. The largest degree
``L`` for which a uniform weight satisfies the criterion is found numerically.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Any

import numpy as np

from applications import ApplicationInputError
from applications.numeric import maximize_log_grid
from mt_engine.model import Instance, VariableSpace
from mt_engine.randomness import KeyedStreams, Purpose
from mt_engine.vcmep import CapacitatedHypergraph

logger = logging.getLogger(__name__)

ALPHA_LOWER = 1e-15
ALPHA_CAP = 1e6
SCAN_MARGIN = 5


class BoundKind(Enum):
    """Criterion used to decide feasibility of a degree bound."""

    NEW = "new"
    ORIGINAL = "original"


@dataclass
class HypergraphColorConfig:
    """Parameters of a hypergraph coloring instance."""

    n_vertices: int
    edges: tuple[tuple[int, ...], ...]
    c: int
    k: int
    L: int  # noqa: N815
    alpha: float

    def to_dict(self) -> dict[str, Any]:
        return {
            "n_vertices": self.n_vertices,
            "m": len(self.edges),
            "c": self.c,
            "k": self.k,
            "L": self.L,
            "alpha": self.alpha,
        }


def _check_ck(c: int, k: int) -> None:
    if c < 2 or k < 2:
        raise ApplicationInputError(f"Need c >= 2 and k >= 2, got c={c}, k={k}")


def new_criterion_rhs(alpha: np.ndarray, c: int, k: int, L: int) -> np.ndarray:  # noqa: N803
    """``c^{-k} [(1 + aA)^k + a (c-1) ((1 + aA)^k - (aA)^k) + a]`` with ``A = (c-1)(L-1)``."""
    a_big = (c - 1) * (L - 1)
    base = (1 + alpha * a_big) ** k
    return c ** (-k) * (base + alpha * (c - 1) * (base - (alpha * a_big) ** k) + alpha)


def original_criterion_rhs(alpha: np.ndarray, c: int, k: int, L: int) -> np.ndarray:  # noqa: N803
    """``c^{-k} (a + (1 + a)^d)`` with ``d = (c-1)(k(L-1) + 1)`` lopsided neighbors."""
    degree = (c - 1) * (k * (L - 1) + 1)
    return c ** (-k) * (alpha + (1 + alpha) ** degree)


def best_alpha(
    c: int, k: int, L: int, kind: BoundKind = BoundKind.NEW  # noqa: N803
) -> tuple[float, float]:
    """Weight maximizing ``alpha - rhs(alpha)`` over ``(0, 10^6]``.

    Returns:
        ``(alpha, margin)``; the degree bound is feasible iff ``margin >= 0``
    """
    _check_ck(c, k)
    rhs = new_criterion_rhs if kind is BoundKind.NEW else original_criterion_rhs
    return maximize_log_grid(lambda a: a - rhs(a, c, k, L), ALPHA_LOWER, ALPHA_CAP)


def feasible(c: int, k: int, L: int, kind: BoundKind = BoundKind.NEW) -> bool:  # noqa: N803
    return best_alpha(c, k, L, kind)[1] >= 0.0


def asymptotic_bound(c: int, k: int) -> float:
    """Closed-form degree bound ``c^k (1 - 1/k)^{k-1} / ((c - 1) k)``."""
    _check_ck(c, k)
    return c**k * (1 - 1 / k) ** (k - 1) / ((c - 1) * k)


def asymptotic_alpha(c: int, k: int, L: int) -> float:  # noqa: N803
    """Weight ``((c^k / ((c-1) k L))^{1/(k-1)} - 1) / ((c-1) L)`` of the closed-form bound."""
    _check_ck(c, k)
    return ((c**k / ((c - 1) * k * L)) ** (1 / (k - 1)) - 1) / ((c - 1) * L)


def classical_bounds(c: int, k: int) -> dict[str, float]:
    """Earlier symmetric bounds on the degree, for comparison."""
    _check_ck(c, k)
    return {
        "lopsided_symmetric": c ** (k - 1) * (1 - 1 / k) ** (k - 1) / k,
        "symmetric": c**k / ((c - 1) * math.e * k),
    }


def hypergraph_lmax(c: int, k: int, kind: BoundKind | str = BoundKind.NEW) -> int:
    """Largest degree ``L`` for which some uniform weight satisfies the criterion.

    The scan starts at the closed-form bound plus a margin and walks down to the
    first feasible value, or walks up while the start is still feasible.

    Returns:
        The largest feasible ``L >= 1``, or 0 if none is
    """
    kind = BoundKind(kind)
    _check_ck(c, k)
    start = math.ceil(asymptotic_bound(c, k)) + SCAN_MARGIN
    if feasible(c, k, start, kind):
        L = start  # noqa: N806
        while feasible(c, k, L + 1, kind):
            L += 1  # noqa: N806
        return L
    for L in range(start - 1, 0, -1):  # noqa: N806
        if feasible(c, k, L, kind):
            logger.debug(f"L_max(c={c}, k={k}, {kind.value}) = {L}")
            return L
    return 0


@dataclass
class TableRow:
    k: int
    L: int  # noqa: N815
    L_original: int  # noqa: N815
    asymptotic: float

    def to_dict(self) -> dict[str, Any]:
        return {"k": self.k, "L": self.L, "L_prime": self.L_original, "asymptotic": self.asymptotic}


def hypergraph_table(c: int, kmin: int, kmax: int) -> list[TableRow]:
    """Largest degrees under the new and the original criterion for ``k`` in a range."""
    if kmin > kmax:
        raise ApplicationInputError(f"Empty range kmin={kmin} > kmax={kmax}")
    rows = [
        TableRow(
            k=k,
            L=hypergraph_lmax(c, k, BoundKind.NEW),
            L_original=hypergraph_lmax(c, k, BoundKind.ORIGINAL),
            asymptotic=asymptotic_bound(c, k),
        )
        for k in range(kmin, kmax + 1)
    ]
    logger.info(f"Computed degree table for c={c}, k={kmin}..{kmax}")
    return rows


def max_degree(n_vertices: int, edges: tuple[tuple[int, ...], ...]) -> int:
    degree = [0] * n_vertices
    for edge in edges:
        for v in edge:
            degree[v] += 1
    return max(degree, default=0)


def hypergraph_build(
    hypergraph: CapacitatedHypergraph, c: int, alpha: float | None = None
) -> tuple[Instance, HypergraphColorConfig]:
    """Build the monochromatic-edge instance; event ``c * e + j`` is edge ``e`` in color ``j``.

    Raises:
        ApplicationInputError: On c < 2 or edges of different sizes
    """
    sizes = {len(edge) for edge in hypergraph.edges}
    if len(sizes) > 1:
        raise ApplicationInputError(f"Hypergraph is not uniform: edge sizes {sorted(sizes)}")
    k = sizes.pop() if sizes else 2
    _check_ck(c, k)
    L = max_degree(hypergraph.n_vertices, hypergraph.edges)  # noqa: N806
    if alpha is None:
        alpha = best_alpha(c, k, max(L, 1))[0]

    events = [
        [(v, color) for v in edge] for edge in hypergraph.edges for color in range(c)
    ]
    instance = Instance.from_terms(VariableSpace.uniform(hypergraph.n_vertices, c), events)
    config = HypergraphColorConfig(
        n_vertices=hypergraph.n_vertices, edges=hypergraph.edges, c=c, k=k, L=L, alpha=alpha
    )
    logger.info(f"Built coloring instance: {len(events)} events, c={c}, k={k}, L={L}")
    return instance, config


def is_proper_coloring(edges: tuple[tuple[int, ...], ...], colors: list[int]) -> bool:
    return all(len({colors[v] for v in edge}) > 1 for edge in edges)


def random_uniform_hypergraph(
    n: int, k: int, L: int, seed: int  # noqa: N803
) -> CapacitatedHypergraph:
    """Random k-uniform hypergraph on ``n`` vertices with maximum degree at most ``L``.

    Edges are drawn among vertices that still have spare degree, aiming for
    ``floor(n L / k)`` edges; the result may hold fewer when draws get stuck.
    """
    if k < 2 or n < k or L < 1:
        raise ApplicationInputError(f"Need k >= 2, n >= k and L >= 1, got n={n}, k={k}, L={L}")
    rng = KeyedStreams(seed).generator(Purpose.SAMPLE, 1)
    degree = np.zeros(n, dtype=int)
    edges: set[tuple[int, ...]] = set()
    target = n * L // k

    for _ in range(target * 4):
        if len(edges) >= target:
            break
        open_vertices = np.flatnonzero(degree < L)
        if len(open_vertices) < k:
            break
        edge = tuple(sorted(int(v) for v in rng.choice(open_vertices, size=k, replace=False)))
        if edge in edges:
            continue
        edges.add(edge)
        degree[list(edge)] += 1

    logger.debug(f"Random hypergraph: {len(edges)} of {target} target edges")
    return CapacitatedHypergraph.uniform_capacity(n, sorted(edges), 1)
