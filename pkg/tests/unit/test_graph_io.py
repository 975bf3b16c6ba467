"""Tests for the edge-list graph format."""

import pytest

from applications.graph_io import GraphFormatError, dump_graph, load_graph, parse_graph
from tests.fixtures.samples import TRANSVERSAL_GRAPH_TEXT


class TestParseGraph:
    """Test cases for parse_graph."""

    def test_partitioned_graph(self):
        """Test edges, isolated vertices and classes."""
        parsed = parse_graph(TRANSVERSAL_GRAPH_TEXT)

        assert parsed.graph.number_of_nodes() == 12
        assert parsed.graph.number_of_edges() == 4
        assert parsed.classes[2] == [8, 9, 10, 11]
        assert parsed.cycle == []

    def test_cycle(self):
        """Test the optional Hamiltonian cycle line."""
        parsed = parse_graph("0 1\n1 2\n2 0\ncycle 0 1 2  # triangle\n")

        assert parsed.cycle == [0, 1, 2]

    @pytest.mark.parametrize(
        ("text", "fragment"),
        [
            ("0 0\n", "self-loop"),
            ("0 1 2\n", "exactly two"),
            ("n 3\nn 3\n", "appears once"),
            ("n 3\n0 5\n", "outside"),
            ("cycle 0 1\ncycle 1 0\n", "duplicate"),
            ("0 -1\n", "nonnegative"),
            ("class\n", "empty class"),
            ("a b\n", "expected vertex numbers"),
        ],
    )
    def test_errors(self, text, fragment):
        """Test malformed inputs."""
        with pytest.raises(GraphFormatError, match=fragment):
            parse_graph(text)


class TestDumpGraph:
    """Test cases for dump_graph and load_graph."""

    def test_round_trip(self, temp_dir):
        """Test that a dumped graph loads back unchanged."""
        parsed = parse_graph(TRANSVERSAL_GRAPH_TEXT)
        path = temp_dir / "g.txt"
        path.write_text(dump_graph(parsed.graph, parsed.classes), encoding="utf-8")

        loaded = load_graph(path)

        assert sorted(loaded.graph.edges) == sorted(parsed.graph.edges)
        assert loaded.classes == parsed.classes
        assert loaded.graph.number_of_nodes() == 12
