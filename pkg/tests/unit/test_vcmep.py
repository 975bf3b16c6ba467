"""Tests for vertex-capacitated maximal edge packing."""

import pytest

from mt_engine.randomness import KeyedStreams
from mt_engine.vcmep import (
    CapacitatedHypergraph,
    HypergraphError,
    Packing,
    PackingNonTerminationError,
    default_round_cap,
    fractional_packing,
    is_feasible,
    is_maximal,
    max_packing_size,
    vcmep_greedy,
    vcmep_parallel_sim,
)


def path_hypergraph(capacities=(1, 1, 1, 1)) -> CapacitatedHypergraph:
    return CapacitatedHypergraph(
        n_vertices=4, edges=((0, 1), (1, 2), (2, 3)), capacities=tuple(capacities)
    )


class TestCapacitatedHypergraph:
    """Test cases for hypergraph invariants."""

    def test_incident(self):
        """Test the vertex-to-edge index."""
        hypergraph = path_hypergraph()

        assert hypergraph.incident == ((0,), (0, 1), (1, 2), (2,))
        assert hypergraph.k == 2
        assert hypergraph.m == 3

    @pytest.mark.parametrize(
        ("edges", "capacities"),
        [
            (((0, 1),), (1,)),
            (((),), (1, 1)),
            (((0, 0),), (1, 1)),
            (((0, 2),), (1, 1)),
            (((0, 1),), (1, -1)),
        ],
    )
    def test_invalid(self, edges, capacities):
        """Test rejected hypergraphs."""
        with pytest.raises(HypergraphError):
            CapacitatedHypergraph(n_vertices=2, edges=edges, capacities=capacities)

    def test_uniform_capacity(self):
        """Test the uniform-capacity constructor."""
        hypergraph = CapacitatedHypergraph.uniform_capacity(3, [[0, 1, 2]], 2)

        assert hypergraph.capacities == (2, 2, 2)


class TestGreedy:
    """Test cases for the sequential greedy packer."""

    def test_unit_capacities(self):
        """Test greedy packing of a path with unit capacities."""
        hypergraph = path_hypergraph()

        packing = vcmep_greedy(hypergraph)

        assert packing.edges == [0, 2]
        assert is_feasible(hypergraph, packing)
        assert is_maximal(hypergraph, packing)

    def test_higher_capacity(self):
        """Test that a capacity of two admits both edges at vertex 1."""
        packing = vcmep_greedy(path_hypergraph((1, 2, 1, 1)))

        assert packing.edges == [0, 1]

    def test_order(self):
        """Test a custom scan order."""
        assert vcmep_greedy(path_hypergraph(), order=[1, 0, 2]).edges == [1]

    def test_zero_capacity_blocks_edges(self):
        """Test that a vertex of capacity zero blocks its edges."""
        packing = vcmep_greedy(path_hypergraph((1, 0, 1, 1)))

        assert packing.edges == [2]

    def test_not_maximal(self):
        """Test maximality detection."""
        hypergraph = path_hypergraph()

        assert not is_maximal(hypergraph, Packing.of(hypergraph, [0]))
        assert not is_feasible(hypergraph, Packing.of(hypergraph, [0, 1]))


class TestMaxPackingSize:
    """Test cases for exhaustive maximum packing."""

    def test_path(self):
        """Test the maximum packing of a path."""
        assert max_packing_size(path_hypergraph()) == 2
        assert max_packing_size(path_hypergraph((2, 2, 2, 2))) == 3

    def test_restricted(self):
        """Test restriction to some edges and residual capacities."""
        hypergraph = path_hypergraph()

        assert max_packing_size(hypergraph, edges=[1], capacities=[1, 0, 1, 1]) == 0

    def test_limit(self):
        """Test the exhaustive search limit."""
        hypergraph = CapacitatedHypergraph.uniform_capacity(1, [[0]] * 11, 1)

        with pytest.raises(ValueError):
            max_packing_size(hypergraph)


class TestFractionalPacking:
    """Test cases for water-filling."""

    def test_single_edge(self):
        """Test that one edge stops at (1 - eps) of a unit capacity."""
        hypergraph = CapacitatedHypergraph.uniform_capacity(2, [[0, 1]], 1)

        assert fractional_packing(hypergraph, [0], [1, 1], eps=0.5) == {0: pytest.approx(0.5)}

    def test_edge_capped_at_one(self):
        """Test that edge values never exceed one."""
        hypergraph = CapacitatedHypergraph.uniform_capacity(2, [[0, 1]], 10)

        assert fractional_packing(hypergraph, [0], [10, 10], eps=0.5)[0] == pytest.approx(1.0)

    def test_vertex_loads_respect_limit(self):
        """Test that shared vertices stay within their fractional limit."""
        hypergraph = CapacitatedHypergraph.uniform_capacity(3, [[0, 1], [1, 2]], 1)

        x = fractional_packing(hypergraph, [0, 1], [1, 1, 1], eps=0.5)

        assert x[0] + x[1] == pytest.approx(0.5)


class TestParallelSim:
    """Test cases for the simulated parallel packer."""

    def test_feasible_and_maximal(self):
        """Test the result on a path hypergraph."""
        hypergraph = path_hypergraph()

        result = vcmep_parallel_sim(hypergraph, seed=1)

        assert is_feasible(hypergraph, result.packing)
        assert is_maximal(hypergraph, result.packing)
        assert result.final_phi == 0
        assert result.rounds == len(result.trace)

    def test_phi_decreases(self):
        """Test that the residual maximum packing never grows."""
        hypergraph = CapacitatedHypergraph.uniform_capacity(
            6, [[0, 1], [1, 2], [2, 3], [3, 4], [4, 5], [5, 0]], 1
        )

        result = vcmep_parallel_sim(hypergraph, seed=5)

        phis = [entry.phi for entry in result.trace]
        assert all(a >= b for a, b in zip(phis, phis[1:], strict=False))

    def test_reproducible(self):
        """Test that equal seeds give equal packings."""
        hypergraph = path_hypergraph((2, 2, 2, 2))

        first = vcmep_parallel_sim(hypergraph, seed=9)
        second = vcmep_parallel_sim(hypergraph, seed=9, streams=KeyedStreams(9))

        assert first.packing.edges == second.packing.edges

    def test_round_cap(self):
        """Test that an exhausted round budget raises."""
        with pytest.raises(PackingNonTerminationError) as exc_info:
            vcmep_parallel_sim(path_hypergraph(), seed=1, round_cap=0)

        assert exc_info.value.rounds == 0

    def test_empty_hypergraph(self):
        """Test a hypergraph without edges."""
        hypergraph = CapacitatedHypergraph.uniform_capacity(2, [], 1)

        result = vcmep_parallel_sim(hypergraph, seed=0)

        assert result.packing.edges == []
        assert result.rounds == 0

    def test_eps_range(self):
        """Test that eps outside (0, 1/2] is rejected."""
        with pytest.raises(ValueError):
            vcmep_parallel_sim(path_hypergraph(), seed=1, eps=0.75)

    def test_default_round_cap(self):
        """Test the default round budget grows with k and m."""
        assert default_round_cap(path_hypergraph()) >= 50
