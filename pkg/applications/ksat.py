"""k-SAT with a bounded number of occurrences per variable.

Every variable is biased away from the polarity in which it occurs most: a
variable occurring in ``l_i`` clauses, ``delta_i l_i`` of them positively, is
true with probability ``1/2 - x (delta_i - 1/2)``. With the weight ``alpha``
and bias ``x`` below, the blend criterion holds with uniform weights whenever
the occurrence bound is at most ``ksat_bounds(k)[0]``.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from applications import ApplicationInputError
from applications.dimacs import Cnf
from mt_engine.criteria import Criterion, CriterionKind, CriterionReport, MuVector, check
from mt_engine.model import Instance, Term, VariableSpace
from mt_engine.randomness import KeyedStreams, Purpose

logger = logging.getLogger(__name__)

MAX_REPAIR_SWEEPS = 10_000


@dataclass
class SatConfig:
    """Parameters of a k-SAT instance and of its biased product measure.

    Attributes:
        cnf: Source formula
        k: Clause size
        L: Occurrence bound used for the parameters
        occurrences: l_i for every variable, indexed from 0
        delta: Fraction of positive occurrences, 1/2 for unused variables
        x: Bias parameter in [0, 1]
        alpha: Uniform weight of every clause event
        epsilon: Slack the weight was chosen for
        p_true: Probability that each variable is true
    """

    cnf: Cnf
    k: int
    L: int  # noqa: N815
    occurrences: list[int]
    delta: list[float]
    x: float
    alpha: float
    epsilon: float = 0.0
    p_true: list[float] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "n": self.cnf.n_vars,
            "m": self.cnf.m,
            "k": self.k,
            "L": self.L,
            "x": self.x,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "max_occurrences": max(self.occurrences, default=0),
        }


def ksat_bounds(k: int) -> tuple[float, float]:
    """Occurrence bounds ``(L_new, L_gst)`` below which k-SAT is satisfiable.

    ``L_new = 2^{k+1} (1 - 1/k)^k / (k - 1) - 2/k`` comes from the blend
    criterion; ``L_gst = 2^{k+1} / (e (k + 1))`` is the earlier bound.
    """
    if k < 2:
        raise ApplicationInputError(f"Clause size must be at least 2, got {k}")
    l_new = 2 ** (k + 1) * (1 - 1 / k) ** k / (k - 1) - 2 / k
    l_gst = 2 ** (k + 1) / (math.e * (k + 1))
    return l_new, l_gst


def ksat_symmetric_bound(k: int) -> float:
    """Bound ``(2^{k+1} - 2e) / (e k)`` from the symmetric lopsided criterion."""
    if k < 2:
        raise ApplicationInputError(f"Clause size must be at least 2, got {k}")
    return (2 ** (k + 1) - 2 * math.e) / (math.e * k)


def ksat_parallel_bound(k: int, epsilon: float) -> float:
    """Occurrence bound under which the weights keep a ``(1 + epsilon)`` slack."""
    if k < 2:
        raise ApplicationInputError(f"Clause size must be at least 2, got {k}")
    return 2 ** (k + 1) * (1 - 1 / k) ** k / ((k - 1) * (1 + epsilon)) - 2 / k


def ksat_alpha(k: int, L: int, epsilon: float = 0.0) -> float:  # noqa: N803
    """Optimal uniform clause weight for occurrence bound ``L`` and slack ``epsilon``.

    ``alpha = 2k ((2^{k+1} / ((1 + epsilon)(2 + kL)))^{1/(k-1)} - 1) / (2 + kL)``,
    clipped at zero when the bound is too large for any positive weight.
    """
    if k < 2:
        raise ApplicationInputError(f"Clause size must be at least 2, got {k}")
    base = 2 + k * L
    ratio = 2 ** (k + 1) / ((1 + epsilon) * base)
    return max(0.0, 2 * k * (ratio ** (1 / (k - 1)) - 1) / base)


def ksat_bias(alpha: float, k: int, L: int) -> float:  # noqa: N803
    """Bias ``x = alpha k L / (2 alpha + 2k + alpha k L)``."""
    return alpha * k * L / (2 * alpha + 2 * k + alpha * k * L)


def clause_terms(clause: tuple[int, ...]) -> list[Term]:
    """Terms of the event 'clause is falsified': literal +v demands v false."""
    return [(abs(lit) - 1, 0 if lit > 0 else 1) for lit in clause]


def ksat_build(
    cnf: Cnf, L: int | None = None, epsilon: float = 0.0  # noqa: N803
) -> tuple[Instance, SatConfig]:
    """Build the biased clause-violation instance of a k-CNF.

    Args:
        cnf: Formula whose clauses all have k distinct variables
        L: Occurrence bound; defaults to the largest occurrence count
        epsilon: Slack the clause weight should leave

    Returns:
        The instance (one event per clause, in clause order) and its parameters

    Raises:
        ApplicationInputError: On k < 2, mixed clause sizes, a repeated
            variable in a clause, or ``L`` below an actual occurrence count
    """
    if not cnf.clauses:
        raise ApplicationInputError("Formula has no clauses")
    k = len(cnf.clauses[0])
    if k < 2:
        raise ApplicationInputError(f"Clause size must be at least 2, got {k}")
    for index, clause in enumerate(cnf.clauses):
        if len(clause) != k:
            raise ApplicationInputError(
                f"Clause {index + 1} has {len(clause)} literals, expected {k}"
            )
        if len({abs(lit) for lit in clause}) != k:
            raise ApplicationInputError(f"Clause {index + 1} repeats a variable")

    occurrences = cnf.occurrences()
    positive = [0] * cnf.n_vars
    for clause in cnf.clauses:
        for lit in clause:
            if lit > 0:
                positive[lit - 1] += 1
    bound = L if L is not None else max(occurrences)
    if bound < max(occurrences):
        raise ApplicationInputError(
            f"Occurrence bound {bound} is below the largest count {max(occurrences)}"
        )

    l_new, _ = ksat_bounds(k)
    limit = ksat_parallel_bound(k, epsilon)
    if bound > limit:
        logger.warning(
            f"Occurrence bound {bound} exceeds {limit:.4f} (L_new = {l_new:.4f}); "
            "the criterion may fail"
        )

    alpha = ksat_alpha(k, bound, epsilon)
    x = ksat_bias(alpha, k, bound)
    delta = [positive[i] / occurrences[i] if occurrences[i] else 0.5 for i in range(cnf.n_vars)]
    p_true = [0.5 - x * (d - 0.5) for d in delta]

    instance = Instance.from_terms(
        VariableSpace.boolean(p_true), (clause_terms(clause) for clause in cnf.clauses)
    )
    config = SatConfig(
        cnf=cnf,
        k=k,
        L=bound,
        occurrences=occurrences,
        delta=delta,
        x=x,
        alpha=alpha,
        epsilon=epsilon,
        p_true=p_true,
    )
    logger.info(f"Built k-SAT instance: k={k}, L={bound}, alpha={alpha:.6g}, x={x:.6g}")
    return instance, config


def ksat_check(instance: Instance, config: SatConfig) -> CriterionReport:
    """Blend criterion with every clause weighted ``alpha``."""
    return check(
        instance,
        MuVector.uniform(instance.m, config.alpha),
        Criterion(CriterionKind.BLEND_CLOSED_FORM, epsilon=config.epsilon),
    )


def balanced_is_worst(config: SatConfig, tolerance: float = 1e-12) -> bool:
    """Check that no clause bound exceeds the balanced-occurrence bound.

    For every clause the product of ``P(literal false) (1 + d L alpha + alpha/k)``,
    with ``d`` the fraction of occurrences of the opposite polarity, must be at
    most ``2^{-k} (1 + alpha/k + alpha L / 2)^k``.
    """
    alpha, k, bound = config.alpha, config.k, config.L
    balanced = 2.0 ** (-k) * (1 + alpha / k + alpha * bound / 2) ** k
    for index, clause in enumerate(config.cnf.clauses):
        product = 1.0
        for lit in clause:
            variable = abs(lit) - 1
            opposite = config.delta[variable] if lit < 0 else 1.0 - config.delta[variable]
            p_false = 0.5 - config.x * (opposite - 0.5)
            product *= p_false * (1 + opposite * bound * alpha + alpha / k)
        if product > balanced * (1 + tolerance):
            logger.info(f"Clause {index + 1} exceeds the balanced bound: {product} > {balanced}")
            return False
    return True


def _balanced_signs(rng: np.random.Generator, count: int) -> list[int]:
    signs = [1] * (count // 2) + [-1] * (count // 2)
    if count % 2:
        signs.append(1 if rng.random() < 0.5 else -1)
    rng.shuffle(signs)
    return signs


def random_regular_ksat(n: int, k: int, L: int, seed: int) -> Cnf:  # noqa: N803
    """Random k-CNF where every variable occurs ``L`` times with balanced polarity.

    Occurrence slots are shuffled and cut into clauses; clauses repeating a
    variable are repaired by swapping slots with other clauses. When ``n L`` is
    not a multiple of ``k`` the leftover slots are dropped, so a few variables
    occur ``L - 1`` times.

    Raises:
        ApplicationInputError: If fewer than k variables are available or no
            repair is found
    """
    if k < 2 or n < k or L < 1:
        raise ApplicationInputError(f"Need k >= 2, n >= k and L >= 1, got n={n}, k={k}, L={L}")
    rng = KeyedStreams(seed).generator(Purpose.SAMPLE, 0)

    slots = np.repeat(np.arange(1, n + 1), L)
    rng.shuffle(slots)
    m = len(slots) // k
    if len(slots) % k:
        logger.debug(f"Dropping {len(slots) % k} occurrence slots")
    clauses = [list(map(int, slots[c * k : (c + 1) * k])) for c in range(m)]

    for _ in range(MAX_REPAIR_SWEEPS):
        bad = [c for c, clause in enumerate(clauses) if len(set(clause)) < k]
        if not bad:
            break
        for c in bad:
            clause = clauses[c]
            position = next(p for p in range(k) if clause[p] in clause[:p])
            other = int(rng.integers(m))
            other_position = int(rng.integers(k))
            mine, theirs = clause[position], clauses[other][other_position]
            if other == c or theirs in clause or mine in clauses[other]:
                continue
            clause[position], clauses[other][other_position] = theirs, mine
    else:
        raise ApplicationInputError(f"Could not build a simple {k}-CNF with n={n}, L={L}")

    positions: dict[int, list[tuple[int, int]]] = {}
    for c, clause in enumerate(clauses):
        for p, variable in enumerate(clause):
            positions.setdefault(variable, []).append((c, p))
    for variable, slots_of in positions.items():
        for (c, p), sign in zip(slots_of, _balanced_signs(rng, len(slots_of)), strict=True):
            clauses[c][p] = sign * variable

    logger.info(f"Generated random {k}-CNF: n={n}, m={m}, L={L}")
    return Cnf(n_vars=n, clauses=tuple(tuple(clause) for clause in clauses))


def assignment_to_bits(assignment: list[int]) -> list[int]:
    """DIMACS-style model: +v for true variables, -v for false ones."""
    return [(i + 1) if value == 1 else -(i + 1) for i, value in enumerate(assignment)]
