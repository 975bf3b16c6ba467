"""Reproduction and statistical checks over the engine and the applications.

Heavy suites are marked ``slow``; each has a reduced counterpart that runs by
default.
"""

import math

import numpy as np
import pytest

from applications.hamiltonian import (
    circulant_hamiltonian_graph,
    hamiltonian_search,
    hamiltonian_threshold,
    solve_second_cycle,
)
from applications.hypergraph import hypergraph_table
from applications.ksat import ksat_build, ksat_check, random_regular_ksat
from applications.ramsey import (
    ramsey_config,
    red_cliques,
    sample_blue_cliques,
    solve_ramsey,
)
from applications.transversal import (
    chosen_vertices,
    is_independent_transversal,
    random_partitioned_graph,
    transversal_alpha,
    transversal_build,
    transversal_fixed_point,
)
from mt_engine.criteria import (
    Criterion,
    CriterionKind,
    MuVector,
    check,
    enumerate_assignable_sets,
    enumerate_orderable_sets,
    rhs,
)
from mt_engine.parallel import (
    ParallelNonTerminationError,
    round_height_check,
    run_full,
    run_hybrid,
)
from mt_engine.sequential import resample_statistics, run
from mt_engine.vcmep import (
    CapacitatedHypergraph,
    is_feasible,
    is_maximal,
    vcmep_greedy,
    vcmep_parallel_sim,
)
from mt_engine.witness import tree_statistics

# rhs(low) <= rhs(high) for every pair
RHS_ORDER = [
    (CriterionKind.ORDERABLE_EXACT, CriterionKind.ASSIGNABLE_EXACT),
    (CriterionKind.ASSIGNABLE_EXACT, CriterionKind.BLEND_CLOSED_FORM),
    (CriterionKind.BLEND_CLOSED_FORM, CriterionKind.LLLL_VARIABLE),
    (CriterionKind.BLEND_CLOSED_FORM, CriterionKind.PEGDEN_VARIABLE),
]


def states_of(run_fn, instance, seed, max_rounds):
    try:
        return run_fn(instance, seed=seed, max_rounds=max_rounds).states()
    except ParallelNonTerminationError as e:
        return e.result.states()


def random_capacitated_hypergraph(rng, unit_capacity=False):
    """At most 30 edges of size at most 5 on up to 15 vertices."""
    n = int(rng.integers(2, 16))
    m = int(rng.integers(1, 31))
    k = int(rng.integers(1, 6))
    edges = []
    for _ in range(m):
        size = min(int(rng.integers(1, k + 1)), n)
        edges.append(tuple(sorted(int(v) for v in rng.choice(n, size=size, replace=False))))
    if unit_capacity:
        return CapacitatedHypergraph.uniform_capacity(n, edges, 1)
    capacities = tuple(int(c) for c in rng.integers(0, 4, size=n))
    return CapacitatedHypergraph(n_vertices=n, edges=tuple(edges), capacities=capacities)


class TestHypergraphTable:
    """Test cases for the hypergraph degree table."""

    def test_two_colors(self):
        """Test the largest degrees for k = 4..11."""
        rows = hypergraph_table(2, 4, 11)

        assert [row.L for row in rows] == [2, 3, 5, 8, 13, 23, 40, 72]
        assert [row.L_original for row in rows] == [2, 3, 4, 7, 12, 21, 38, 69]


class TestCriterionOrdering:
    """Test cases for the ordering of criteria on random instances."""

    def assert_ordering(self, make_instance, seeds):
        for seed in seeds:
            instance = make_instance(seed)
            rng = np.random.default_rng(seed)
            mu = MuVector.of(float(v) for v in rng.uniform(0.0, 1.0, size=instance.m))
            for event in instance.events:
                values = {
                    kind: rhs(event, mu, Criterion(kind), instance)
                    for pair in RHS_ORDER
                    for kind in pair
                }
                for low, high in RHS_ORDER:
                    assert values[low] <= values[high] * (1 + 1e-9), (seed, event.id, low, high)

    def assert_orderable_sets_assignable(self, make_instance, seeds):
        for seed in seeds:
            instance = make_instance(seed)
            for event in instance.events:
                orderable = set(enumerate_orderable_sets(event, instance))
                assignable = set(enumerate_assignable_sets(event, instance))
                assert orderable <= assignable, (seed, event.id)

    def test_ordering(self, random_small_instance):
        """Test the rhs ordering on 50 random instances."""
        self.assert_ordering(random_small_instance, range(50))

    def test_orderable_sets_are_assignable(self, random_small_instance):
        """Test the family inclusion on 50 random instances."""
        self.assert_orderable_sets_assignable(random_small_instance, range(50))

    @pytest.mark.slow
    def test_ordering_full(self, random_small_instance):
        """Test the rhs ordering and the family inclusion on 500 random instances."""
        self.assert_ordering(random_small_instance, range(500))
        self.assert_orderable_sets_assignable(random_small_instance, range(500))


class TestToyStatistics:
    """Test cases for witness tree and resampling statistics on the toy instance."""

    def test_tree_frequencies(self, two_event_instance):
        """Test tree frequencies against their weights over 2000 runs."""
        records = tree_statistics(two_event_instance, runs=2000, seed=11)

        assert all(record.ok for record in records), [r.to_dict() for r in records if not r.ok]

    @pytest.mark.slow
    def test_tree_frequencies_full(self, two_event_instance):
        """Test tree frequencies against their weights over 10^5 runs."""
        records = tree_statistics(two_event_instance, runs=100_000, seed=11)

        assert all(record.ok for record in records), [r.to_dict() for r in records if not r.ok]

    @pytest.mark.parametrize(
        "runs", [pytest.param(1000), pytest.param(10_000, marks=pytest.mark.slow)]
    )
    def test_resampling_bound(self, two_event_instance, runs):
        """Test mean resampling counts against the weight 1/2."""
        summary = resample_statistics(two_event_instance, runs, seed=5)

        limits = summary.upper_bounds(MuVector.uniform(2, 0.5))
        assert all(mean <= limit for mean, limit in zip(summary.mean, limits, strict=True))


class TestParallelCoupling:
    """Test cases for the full and hybrid parallel runs."""

    def assert_coupled(self, make_instance, instances, seeds):
        for index in instances:
            instance = make_instance(index, min_domain=2)
            for seed in seeds:
                full = states_of(run_full, instance, seed, 200)
                hybrid = states_of(run_hybrid, instance, seed, 200)
                assert full == hybrid, (index, seed)

    def test_coupling(self, random_small_instance):
        """Test identical sub-round states on 5 instances and 4 seeds."""
        self.assert_coupled(random_small_instance, range(5), range(4))

    @pytest.mark.slow
    def test_coupling_full(self, random_small_instance):
        """Test identical sub-round states on 20 instances and 100 seeds."""
        self.assert_coupled(random_small_instance, range(20), range(100))

    def test_round_heights(self, random_small_instance):
        """Test tree heights against rounds over 50 seeded hybrid runs."""
        checked = 0
        for seed in range(50):
            instance = random_small_instance(100 + seed, max_events=6, min_domain=2)
            try:
                result = run_hybrid(instance, seed=seed, max_rounds=30)
            except ParallelNonTerminationError:
                continue
            report = round_height_check(result, instance)
            assert report.ok, (seed, report.to_dict())
            checked += 1

        assert checked > 0


class TestEdgePacking:
    """Test cases for greedy and simulated parallel packings."""

    def assert_packings(self, count):
        rng = np.random.default_rng(2024)
        for trial in range(count):
            hypergraph = random_capacitated_hypergraph(rng)
            for packing in (
                vcmep_greedy(hypergraph),
                vcmep_parallel_sim(hypergraph, seed=trial).packing,
            ):
                assert is_feasible(hypergraph, packing), trial
                assert is_maximal(hypergraph, packing), trial

            unit = random_capacitated_hypergraph(rng, unit_capacity=True)
            for packing in (vcmep_greedy(unit), vcmep_parallel_sim(unit, seed=trial).packing):
                covered = [v for index in packing.edges for v in unit.edges[index]]
                assert len(covered) == len(set(covered)), trial
                assert is_maximal(unit, packing), trial

    def test_packings(self):
        """Test feasibility and maximality on 100 random hypergraphs."""
        self.assert_packings(100)

    @pytest.mark.slow
    def test_packings_full(self):
        """Test feasibility and maximality on 1000 random hypergraphs."""
        self.assert_packings(1000)


class TestApplications:
    """Test cases for solving application instances at scale."""

    def solve_ksat(self, seed):
        cnf = random_regular_ksat(200, 6, 8, seed=seed)
        instance, config = ksat_build(cnf)
        result = run(instance, seed=seed)
        assert cnf.is_satisfied(result.assignment), seed
        assert ksat_check(instance, config).satisfied, seed

    def test_ksat(self):
        """Test five random 6-CNFs with eight occurrences per variable."""
        for seed in range(5):
            self.solve_ksat(seed)

    @pytest.mark.slow
    def test_ksat_full(self):
        """Test 100 random 6-CNFs with eight occurrences per variable."""
        for seed in range(100):
            self.solve_ksat(seed)

    def test_transversal(self):
        """Test 50 random graphs with classes of 7 and degree 2."""
        for seed in range(50):
            graph, partition = random_partitioned_graph(8, 7, 2, seed=seed)
            instance, config = transversal_build(graph, partition)

            result = run(instance, seed=seed)

            assert is_independent_transversal(config, chosen_vertices(config, result.assignment))
            mu = MuVector.uniform(instance.m, config.alpha)
            assert check(instance, mu, Criterion(CriterionKind.BLEND_CLOSED_FORM)).satisfied

    def test_transversal_boundary(self):
        """Test that class size 7 is the first feasible one for degree 2."""
        assert transversal_alpha(7, 2) == pytest.approx(1 / 12)
        assert transversal_alpha(6, 2) is None
        assert transversal_fixed_point(6, 2) is None

    def test_ramsey(self):
        """Test 100 triangle-free colorings of K_20 and their blue K_5 frequency."""
        config = ramsey_config(20, 3, t=5)
        colorings = []
        for seed in range(100):
            solution = solve_ramsey(config, seed=seed)
            assert red_cliques(solution.red_graph(config), 3) == [], seed
            colorings.append(solution.coloring)

        estimate = sample_blue_cliques(config, colorings, t=5, seed=0)

        assert estimate.trials == 100
        assert estimate.ok, estimate.to_dict()


@pytest.mark.slow
class TestHamiltonianThreshold:
    """Test cases for the degree threshold at the default grid resolution."""

    def test_boundary(self):
        """Test that degree 43 is feasible and 42 is not."""
        assert hamiltonian_search(43).feasible
        assert not hamiltonian_search(42).feasible

    def test_threshold(self):
        """Test the threshold scan."""
        assert hamiltonian_threshold(kmin=40) == 43

    def test_solve(self):
        """Test a second-cycle certificate on a 43-regular circulant graph."""
        graph, cycle = circulant_hamiltonian_graph(88, 43)

        selected, result, config = solve_second_cycle(graph, cycle, seed=1)

        assert config.k == 43
        assert selected
        assert result.stats.terminated


@pytest.mark.slow
class TestRoundScaling:
    """Test cases for parallel round counts against log W / epsilon."""

    EPSILON = 0.5

    def rounds_and_scale(self, seed):
        cnf = random_regular_ksat(300, 6, 5, seed=seed)
        instance, config = ksat_build(cnf, epsilon=self.EPSILON)
        result = run_full(instance, seed=seed)
        return result.rounds, math.log(config.alpha * instance.m + 2) / self.EPSILON

    def test_rounds(self):
        """Test 100 fresh instances against a constant calibrated on 20."""
        calibration = [self.rounds_and_scale(seed) for seed in range(20)]
        c0 = max(rounds / scale for rounds, scale in calibration)

        fresh = [self.rounds_and_scale(seed) for seed in range(1000, 1100)]
        within = sum(rounds <= 2 * c0 * scale for rounds, scale in fresh)

        assert within >= 99
