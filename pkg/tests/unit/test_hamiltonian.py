"""Tests for the second Hamiltonian cycle application."""

import networkx as nx
import pytest

from applications import ApplicationInputError
from applications.hamiltonian import (
    HamiltonConfig,
    avoids_bad_events,
    circulant_hamiltonian_graph,
    hamiltonian_build,
    hamiltonian_search,
    selected_set,
)


@pytest.fixture
def cubic_graph():
    """3-regular circulant on ten vertices; vertex v has off-cycle neighbor v + 5."""
    return circulant_hamiltonian_graph(10, 3)


class TestCirculant:
    """Test cases for circulant_hamiltonian_graph."""

    @pytest.mark.parametrize(("n", "k"), [(10, 3), (12, 4), (20, 7)])
    def test_regular(self, n, k):
        """Test degree and cycle of the generated graph."""
        graph, cycle = circulant_hamiltonian_graph(n, k)

        assert {d for _, d in graph.degree} == {k}
        assert all(graph.has_edge(cycle[i], cycle[(i + 1) % n]) for i in range(n))

    def test_odd_degree_odd_order(self):
        """Test that odd k needs an even vertex count."""
        with pytest.raises(ApplicationInputError):
            circulant_hamiltonian_graph(9, 3)


class TestSearch:
    """Test cases for the inclusion-probability search."""

    def test_small_degree_infeasible(self):
        """Test that a small degree has no weights."""
        result = hamiltonian_search(5, resolution=0.01)

        assert not result.feasible
        assert result.p is None
        assert result.to_dict()["k"] == 5

    def test_own_weight_term_only_tightens(self):
        """Test that leaving out the own-weight term never raises the weights."""
        with_own = hamiltonian_search(60, resolution=0.005)
        without_own = hamiltonian_search(60, resolution=0.005, self_terms=False)

        assert with_own.feasible and without_own.feasible
        assert without_own.feasible_points >= with_own.feasible_points
        assert without_own.a + without_own.b <= with_own.a + with_own.b

    def test_degree_below_three(self):
        """Test the degree precondition."""
        with pytest.raises(ApplicationInputError):
            hamiltonian_search(2)


class TestBuild:
    """Test cases for hamiltonian_build and the event families."""

    def test_events(self, cubic_graph):
        """Test type A and type B events."""
        graph, cycle = cubic_graph

        instance, config = hamiltonian_build(graph, cycle, p=0.3)

        assert instance.m == 20
        assert instance.events[0].terms == ((0, 1), (1, 1))
        assert instance.events[10].terms == ((0, 0), (5, 0))
        assert config.k == 3
        assert config.p == 0.3

    def test_not_regular(self):
        """Test that irregular graphs are rejected."""
        graph = nx.cycle_graph(5)
        graph.add_edge(0, 2)

        with pytest.raises(ApplicationInputError, match="not regular"):
            hamiltonian_build(graph, list(range(5)), p=0.2)

    def test_not_hamiltonian(self, cubic_graph):
        """Test that the cycle must use graph edges."""
        graph, _ = cubic_graph

        with pytest.raises(ApplicationInputError):
            hamiltonian_build(graph, [0, 2, 1, 3, 4, 5, 6, 7, 8, 9], p=0.2)

    def test_no_feasible_p(self, cubic_graph):
        """Test that omitting p fails when the search fails."""
        graph, cycle = cubic_graph

        with pytest.raises(ApplicationInputError):
            hamiltonian_build(graph, cycle)


class TestAvoidsBadEvents:
    """Test cases for the set check."""

    def make_config(self, graph, cycle) -> HamiltonConfig:
        return HamiltonConfig(graph=graph, cycle=cycle, k=3, p=0.3, a=0.0, b=0.0)

    def test_even_vertices(self, cubic_graph):
        """Test a set that is independent on the cycle and dominating off it."""
        config = self.make_config(*cubic_graph)

        assert avoids_bad_events(config, [0, 2, 4, 6, 8])

    def test_consecutive(self, cubic_graph):
        """Test a set containing a cycle edge."""
        config = self.make_config(*cubic_graph)

        assert not avoids_bad_events(config, [0, 1, 3, 5, 7])

    def test_not_dominating(self, cubic_graph):
        """Test a vertex without an off-cycle neighbor in the set."""
        config = self.make_config(*cubic_graph)

        assert not avoids_bad_events(config, [0, 2, 4, 6])

    def test_selected_set(self):
        """Test reading S from an assignment."""
        assert selected_set([1, 0, 0, 1]) == [0, 3]
