"""Colorings of K_n without a red K_s and with few blue K_t.

Every edge of K_n is red with probability p and the bad-events are the red
s-cliques. Resampling the edges of a red clique can only turn edges blue, so no
new bad-event is ever created: the red cliques of the initial coloring can be
enumerated once and cleared one after another.
"""

import logging
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Any

import networkx as nx

from applications import ApplicationInputError
from mt_engine.criteria import DEFAULT_ENUMERATION_CAP
from mt_engine.model import Instance, VariableSpace
from mt_engine.randomness import KeyedStreams, Purpose, draw_values, initial_assignment
from mt_engine.sequential import (
    DEFAULT_MAX_STEPS,
    ExecutionLog,
    LogStep,
    NonTerminationError,
    RunStats,
)

logger = logging.getLogger(__name__)

RED = 1
BLUE = 0


@dataclass
class RamseyConfig:
    """Edge probability and weights for coloring K_n.

    Attributes:
        n: Vertex count
        s: Size of the forbidden red clique
        t: Size of the blue clique whose probability is bounded, if any
        p: Probability that an edge is red
        q: Probability that a given s-clique is red, ``p^{C(s,2)}``
        mu: Weight ``q / (1 - q)`` of every red-clique event
        c_s: Constant of the lower bound on R(s, t)
        c_s_prime: Constant of the companion bound
    """

    n: int
    s: int
    t: int | None
    p: float
    q: float
    mu: float
    c_s: float
    c_s_prime: float

    @property
    def edges(self) -> list[tuple[int, int]]:
        """Edges of K_n in variable order."""
        return list(combinations(range(self.n), 2))

    def edge_index(self, u: int, v: int) -> int:
        u, v = min(u, v), max(u, v)
        return u * self.n - u * (u + 1) // 2 + (v - u - 1)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {
            "n": self.n,
            "s": self.s,
            "t": self.t,
            "p": self.p,
            "q": self.q,
            "mu": self.mu,
            "c_s": self.c_s,
            "c_s_prime": self.c_s_prime,
        }
        if self.t is not None:
            data["blue_bound"] = ramsey_blue_bound(self.n, self.s, self.t)
        return data


def _check_s(s: int) -> None:
    if s < 3:
        raise ApplicationInputError(f"Clique size s must be at least 3, got {s}")


def ramsey_probability(n: int, s: int) -> float:
    """``p = (2 (s-2)! / ((s-1) s))^{2 / (s^2 - s - 2)} n^{-2 / (s+1)}``."""
    _check_s(s)
    if n < s:
        raise ApplicationInputError(f"Need n >= s, got n={n}, s={s}")
    base = 2 * math.factorial(s - 2) / ((s - 1) * s)
    return base ** (2 / (s * s - s - 2)) * n ** (-2 / (s + 1))


def ramsey_constants(s: int) -> tuple[float, float]:
    """Constants ``(c_s, c'_s)`` of the asymptotic lower bounds on R(s, t)."""
    _check_s(s)
    pairs = math.comb(s, 2)
    c_s = (2 / s - 2 / (s - 1) + 1) ** ((s + 1) / 2) * (
        2 * math.factorial(s - 2) / (s * (s - 1) ** pairs)
    ) ** (1 / (s - 2))
    c_s_prime = (2 * math.factorial(s - 2) / (s * (s - 1))) ** (2 / (s * s - s - 2)) * (
        1 + 2 / (s - s * s)
    )
    return c_s, c_s_prime


def ramsey_config(n: int, s: int, t: int | None = None) -> RamseyConfig:
    p = ramsey_probability(n, s)
    q = p ** math.comb(s, 2)
    c_s, c_s_prime = ramsey_constants(s)
    return RamseyConfig(
        n=n, s=s, t=t, p=p, q=q, mu=q / (1 - q), c_s=c_s, c_s_prime=c_s_prime
    )


def ramsey_blue_bound(n: int, s: int, t: int) -> float:
    """Bound ``((1-p)(1 + C(n-2, s-2) mu))^{C(t,2)}`` on P(a fixed t-set is blue) at termination."""
    if t < 2 or t > n:
        raise ApplicationInputError(f"Need 2 <= t <= n, got t={t}, n={n}")
    config = ramsey_config(n, s)
    factor = (1 - config.p) * (1 + math.comb(n - 2, s - 2) * config.mu)
    return min(1.0, factor ** math.comb(t, 2))


def ramsey_build(
    n: int, s: int, t: int | None = None, enumeration_cap: int = DEFAULT_ENUMERATION_CAP
) -> tuple[Instance, RamseyConfig]:
    """Build the red-clique instance on the edges of K_n.

    Variable ``i`` is edge ``i`` of :attr:`RamseyConfig.edges` with value 1 for
    red; event ``j`` is the ``j``-th s-subset of vertices in lexicographic order.

    Raises:
        ApplicationInputError: If ``C(n, s)`` exceeds ``enumeration_cap``
    """
    config = ramsey_config(n, s, t)
    count = math.comb(n, s)
    if count > enumeration_cap:
        raise ApplicationInputError(
            f"C({n},{s}) = {count} red-clique events exceed the cap {enumeration_cap}"
        )
    space = VariableSpace.boolean([config.p] * math.comb(n, 2))
    events = (
        [(config.edge_index(u, v), RED) for u, v in combinations(clique, 2)]
        for clique in combinations(range(n), s)
    )
    instance = Instance.from_terms(space, events)
    logger.info(f"Built Ramsey instance: n={n}, s={s}, {count} events, p={config.p:.4f}")
    return instance, config


@dataclass
class RamseySolution:
    """Terminal coloring of the clique-clearing run."""

    coloring: list[int]
    steps: int
    initial_red_cliques: int
    counts: dict[tuple[int, ...], int] = field(default_factory=dict)

    def red_graph(self, config: RamseyConfig) -> nx.Graph:
        graph = nx.empty_graph(config.n)
        colored = zip(config.edges, self.coloring, strict=True)
        graph.add_edges_from(e for e, c in colored if c == RED)
        return graph

    def to_dict(self) -> dict[str, Any]:
        return {
            "steps": self.steps,
            "initial_red_cliques": self.initial_red_cliques,
            "red_edges": sum(self.coloring),
        }


def clique_event_id(n: int, clique: tuple[int, ...]) -> int:
    """Rank of a sorted vertex tuple among the s-subsets of ``range(n)`` in lexicographic order.

    This is the event id :func:`ramsey_build` gives the clique.
    """
    s = len(clique)
    rank = 0
    previous = -1
    for position, vertex in enumerate(clique):
        for skipped in range(previous + 1, vertex):
            rank += math.comb(n - skipped - 1, s - position - 1)
        previous = vertex
    return rank


def red_cliques(graph: nx.Graph, s: int) -> list[tuple[int, ...]]:
    """All s-cliques of ``graph``, each as a sorted vertex tuple."""
    found = []
    for clique in nx.enumerate_all_cliques(graph):
        if len(clique) > s:
            break
        if len(clique) == s:
            found.append(tuple(sorted(clique)))
    return found


def solve_ramsey(
    config: RamseyConfig, seed: int, max_steps: int = DEFAULT_MAX_STEPS
) -> RamseySolution:
    """Clear every red s-clique of a random coloring by resampling its edges.

    The initial coloring and every resampling use the same keyed streams as the
    sequential algorithm; the red cliques are enumerated once.

    Raises:
        NonTerminationError: If more than ``max_steps`` resamplings are needed
    """
    space = VariableSpace.boolean([config.p] * math.comb(config.n, 2))
    streams = KeyedStreams(seed)
    coloring = initial_assignment(space, streams)
    log = ExecutionLog(initial=tuple(coloring))
    solution = RamseySolution(coloring=coloring, steps=0, initial_red_cliques=0)
    event_counts: dict[int, int] = {}

    initial = red_cliques(solution.red_graph(config), config.s)
    solution.initial_red_cliques = len(initial)
    t = 0
    for clique in initial:
        event_id = clique_event_id(config.n, clique)
        variables = [config.edge_index(u, v) for u, v in combinations(clique, 2)]
        while all(coloring[i] == RED for i in variables):
            if t >= max_steps:
                counts = [0] * math.comb(config.n, config.s)
                for index, count in event_counts.items():
                    counts[index] = count
                stats = RunStats(steps=t, counts=counts, terminated=False)
                raise NonTerminationError(max_steps, log, stats, list(coloring))
            t += 1
            values = draw_values(
                space, variables, streams.uniforms(Purpose.RESAMPLE, t, size=len(variables))
            )
            for i, value in zip(variables, values, strict=True):
                coloring[i] = value
            log.steps.append(LogStep(t=t, event=event_id, values=tuple(values)))
            event_counts[event_id] = event_counts.get(event_id, 0) + 1
            solution.counts[clique] = solution.counts.get(clique, 0) + 1
    solution.steps = t

    if red_cliques(solution.red_graph(config), config.s):
        raise ApplicationInputError("A red clique survived; the coloring is inconsistent")
    logger.info(
        f"Cleared {len(initial)} red K_{config.s} with {t} resamplings (seed {seed})"
    )
    return solution


@dataclass
class BlueCliqueEstimate:
    """Empirical frequency of an all-blue random t-set against its bound."""

    t: int
    trials: int
    hits: int
    bound: float

    @property
    def frequency(self) -> float:
        return self.hits / self.trials if self.trials else 0.0

    @property
    def sd(self) -> float:
        """Binomial standard deviation of the frequency at the bound."""
        return math.sqrt(self.bound * (1 - self.bound) / self.trials) if self.trials else 0.0

    @property
    def ok(self) -> bool:
        return self.frequency <= self.bound + 3 * self.sd

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "trials": self.trials,
            "hits": self.hits,
            "frequency": self.frequency,
            "bound": self.bound,
            "sd": self.sd,
            "ok": self.ok,
        }


def sample_blue_cliques(
    config: RamseyConfig,
    colorings: list[list[int]],
    t: int,
    seed: int,
    samples_per_coloring: int = 1,
) -> BlueCliqueEstimate:
    """Draw random t-sets from each terminal coloring and count the all-blue ones."""
    streams = KeyedStreams(seed)
    hits = 0
    for run_index, coloring in enumerate(colorings):
        for sample in range(samples_per_coloring):
            rng = streams.generator(Purpose.SAMPLE, run_index, sample)
            vertices = sorted(int(v) for v in rng.choice(config.n, size=t, replace=False))
            if all(
                coloring[config.edge_index(u, v)] == BLUE for u, v in combinations(vertices, 2)
            ):
                hits += 1
    estimate = BlueCliqueEstimate(
        t=t,
        trials=len(colorings) * samples_per_coloring,
        hits=hits,
        bound=ramsey_blue_bound(config.n, config.s, t),
    )
    logger.info(f"Blue K_{t}: {hits}/{estimate.trials} vs bound {estimate.bound:.4f}")
    return estimate
