"""Tests for batch execution."""

import os

import pytest

from utils.parallel_processor import (
    MAX_DEFAULT_WORKERS,
    WORKERS_ENV_VAR,
    BatchOutcome,
    BatchRunner,
    batch_statistics,
    default_workers,
)


def square_or_fail(value):
    if value < 0:
        raise ValueError(f"negative {value}")
    return value * value


class TestBatchRunner:
    """Test cases for BatchRunner."""

    @pytest.mark.parametrize("workers", [1, 4])
    def test_order_preserved(self, workers):
        """Test that outcomes follow item order."""
        outcomes = BatchRunner(max_workers=workers).map(square_or_fail, list(range(20)))

        assert [o.index for o in outcomes] == list(range(20))
        assert [o.result for o in outcomes] == [i * i for i in range(20)]

    def test_errors_captured(self):
        """Test that a failing item does not stop the batch."""
        outcomes = BatchRunner(max_workers=2).map(square_or_fail, [1, -2, 3])

        assert [o.success for o in outcomes] == [True, False, True]
        assert isinstance(outcomes[1].error, ValueError)
        assert outcomes[1].result is None

    def test_empty(self):
        """Test an empty batch."""
        assert BatchRunner(max_workers=2).map(square_or_fail, []) == []

    def test_invalid_workers(self):
        """Test that fewer than one worker is rejected."""
        with pytest.raises(ValueError):
            BatchRunner(max_workers=0)


class TestBatchStatistics:
    """Test cases for batch_statistics."""

    def test_summary(self):
        """Test counts and failed indices."""
        outcomes = [
            BatchOutcome(index=0, result=1, start_time=1.0, end_time=2.0),
            BatchOutcome(index=1, error=ValueError("x"), start_time=1.0, end_time=1.5),
            BatchOutcome(index=2, result=4, start_time=3.0, end_time=6.0),
        ]

        stats = batch_statistics(outcomes)

        assert stats["total"] == 3
        assert stats["succeeded"] == 2
        assert stats["failed_indices"] == [1]
        assert stats["total_time"] == pytest.approx(4.5)
        assert stats["max_time"] == pytest.approx(3.0)

    def test_duration_never_negative(self):
        """Test an outcome whose end precedes its start."""
        assert BatchOutcome(index=0, start_time=5.0, end_time=1.0).duration == 0.0


class TestDefaultWorkers:
    """Test cases for default_workers."""

    def test_environment(self, monkeypatch):
        """Test the environment override."""
        monkeypatch.setenv(WORKERS_ENV_VAR, "5")

        assert default_workers() == 5

    @pytest.mark.parametrize("raw", ["", "lots", "0", "-3"])
    def test_ignored_values(self, monkeypatch, raw):
        """Test that unusable values fall back to the CPU count."""
        monkeypatch.setenv(WORKERS_ENV_VAR, raw)

        assert default_workers() == min(MAX_DEFAULT_WORKERS, os.cpu_count() or 1)
