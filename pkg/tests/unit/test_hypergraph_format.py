"""Tests for the hypergraph text format."""

import pytest

from mt_engine.hypergraph_format import (
    HypergraphFormatError,
    dump_hypergraph,
    load_hypergraph,
    parse_hypergraph,
)
from mt_engine.vcmep import HypergraphError
from tests.fixtures.samples import SMALL_HYPERGRAPH_TEXT


class TestParseHypergraph:
    """Test cases for parse_hypergraph."""

    def test_default_capacities(self):
        """Test that vertices without a cap line get capacity 1."""
        hypergraph = parse_hypergraph(SMALL_HYPERGRAPH_TEXT)

        assert hypergraph.n_vertices == 8
        assert hypergraph.m == 4
        assert hypergraph.k == 4
        assert hypergraph.capacities == (1,) * 8

    def test_capacities(self):
        """Test explicit capacities."""
        hypergraph = parse_hypergraph("v 3\ncap 1 2\nedge 0 1\nedge 1 2\n")

        assert hypergraph.capacities == (1, 2, 1)
        assert hypergraph.incident[1] == (0, 1)

    @pytest.mark.parametrize(
        ("text", "fragment"),
        [
            ("edge 0 1\n", "before 'v'"),
            ("v 2\nv 2\n", "duplicate 'v'"),
            ("v 2\nedge 0 2\n", "out of range"),
            ("v 2\nedge 0 0\n", "repeats a vertex"),
            ("v 2\nedge\n", "empty edge"),
            ("v 2\ncap 0\n", "'cap' takes"),
            ("v 2\ncap 0 1\ncap 0 2\n", "duplicate capacity"),
            ("v 2\nface 0 1\n", "unknown directive"),
            ("v two\n", "expected integers"),
            ("# nothing\n", "missing 'v'"),
        ],
    )
    def test_syntax_errors(self, text, fragment):
        """Test each syntax error is reported."""
        with pytest.raises(HypergraphFormatError, match=fragment):
            parse_hypergraph(text)

    def test_negative_capacity(self):
        """Test that negative capacities break the hypergraph invariants."""
        with pytest.raises(HypergraphError):
            parse_hypergraph("v 1\ncap 0 -1\n")


class TestDumpHypergraph:
    """Test cases for dump_hypergraph and load_hypergraph."""

    def test_dump_round_trip(self):
        """Test that dumped text parses back."""
        hypergraph = parse_hypergraph("v 3\ncap 1 2\nedge 0 1\nedge 1 2\n")

        assert parse_hypergraph(dump_hypergraph(hypergraph)) == hypergraph

    def test_dump_without_capacities(self):
        """Test omitting capacity lines."""
        hypergraph = parse_hypergraph("v 2\nedge 0 1\n")

        assert dump_hypergraph(hypergraph, capacities=False) == "v 2\nedge 0 1\n"

    def test_load(self, temp_dir):
        """Test reading a hypergraph file."""
        path = temp_dir / "h.txt"
        path.write_text(SMALL_HYPERGRAPH_TEXT, encoding="utf-8")

        assert load_hypergraph(path).m == 4
