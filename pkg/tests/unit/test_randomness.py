"""Tests for keyed random substreams."""

import numpy as np
import pytest

from mt_engine.model import VariableSpace
from mt_engine.randomness import KeyedStreams, Purpose, draw_values, initial_assignment


class TestKeyedStreams:
    """Test cases for KeyedStreams."""

    def test_same_key_same_draws(self):
        """Test that a draw depends only on seed, purpose and key."""
        first = KeyedStreams(7)
        second = KeyedStreams(7)

        first.uniform(Purpose.RULE, 1)
        np.testing.assert_array_equal(
            first.uniforms(Purpose.RESAMPLE, 3, size=4),
            second.uniforms(Purpose.RESAMPLE, 3, size=4),
        )

    def test_keys_are_independent(self):
        """Test that distinct keys and purposes give distinct streams."""
        streams = KeyedStreams(7)

        draws = {
            streams.uniform(Purpose.RESAMPLE, 1),
            streams.uniform(Purpose.RESAMPLE, 2),
            streams.uniform(Purpose.RULE, 1),
            KeyedStreams(8).uniform(Purpose.RESAMPLE, 1),
        }

        assert len(draws) == 4

    def test_uniform_range(self):
        """Test that uniforms lie in [0, 1)."""
        values = KeyedStreams(1).uniforms(Purpose.SAMPLE, 0, size=1000)

        assert values.min() >= 0.0
        assert values.max() < 1.0

    def test_derive_seed(self):
        """Test derived seeds are stable nonnegative 63-bit integers."""
        streams = KeyedStreams(3)

        seed = streams.derive_seed(Purpose.RUN, 5)

        assert seed == streams.derive_seed(Purpose.RUN, 5)
        assert seed != streams.derive_seed(Purpose.RUN, 6)
        assert 0 <= seed < 2**63

    def test_negative_seed(self):
        """Test that negative root seeds are rejected."""
        with pytest.raises(ValueError, match="nonnegative"):
            KeyedStreams(-1)


class TestDraws:
    """Test cases for draw_values and initial_assignment."""

    def test_draw_values(self):
        """Test mapping uniforms onto the listed variables."""
        space = VariableSpace.uniform(2, 3)

        assert draw_values(space, [1, 0], [0.1, 0.9]) == [0, 2]

    def test_initial_assignment_is_reproducible(self):
        """Test that the initial assignment depends only on the seed."""
        space = VariableSpace.uniform(20, 3)

        first = initial_assignment(space, KeyedStreams(11))

        assert first == initial_assignment(space, KeyedStreams(11))
        assert len(first) == 20
        assert set(first) <= {0, 1, 2}

    def test_empty_space(self):
        """Test the assignment of an empty space."""
        assert initial_assignment(VariableSpace.uniform(0), KeyedStreams(0)) == []
