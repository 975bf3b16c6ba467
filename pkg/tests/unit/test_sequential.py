"""Tests for sequential resampling, logs and batch statistics."""

import logging

import pytest

from mt_engine.criteria import MuVector
from mt_engine.model import BadEvent
from mt_engine.sequential import (
    ExecutionLog,
    LogReplayError,
    LogStep,
    NonTerminationError,
    RandomizedRule,
    RuleContractError,
    TrueEventTracker,
    distribution_bound,
    estimate_event_probability,
    lowest_id_rule,
    replay,
    resample_statistics,
    run,
    run_batch,
    run_seeds,
)


class TestRules:
    """Test cases for resample rules."""

    def test_lowest_id(self):
        """Test the default rule."""
        assert lowest_id_rule([0, 0], frozenset({3, 1, 2}), 1) == 1

    def test_randomized_rule(self):
        """Test that the randomized rule picks a true event reproducibly."""
        rule = RandomizedRule(4)
        true_ids = frozenset({2, 5, 7})

        picks = [rule([], true_ids, step) for step in range(1, 30)]

        assert set(picks) <= true_ids
        assert picks == [RandomizedRule(4)([], true_ids, step) for step in range(1, 30)]
        assert len(set(picks)) > 1


class TestTrueEventTracker:
    """Test cases for incremental true-event tracking."""

    def test_updates(self, two_event_instance):
        """Test tracking across single-variable changes."""
        tracker = TrueEventTracker(two_event_instance, [0, 0, 0])
        assert tracker.true_ids == {0}

        tracker.update(1, 0, 1)
        assert tracker.true_ids == {1}

        tracker.update(2, 0, 1)
        assert tracker.true_ids == set()

        tracker.update(2, 1, 1)
        assert tracker.true_ids == set()


class TestRun:
    """Test cases for run and replay."""

    def test_terminates(self, two_event_instance):
        """Test that a run ends with no true event and a consistent log."""
        result = run(two_event_instance, seed=3)

        assert result.stats.terminated
        assert two_event_instance.true_events(result.assignment) == []
        assert result.stats.steps == result.log.T == sum(result.stats.counts)
        assert replay(two_event_instance, result.log)[-1] == result.assignment

    def test_reproducible(self, two_event_instance):
        """Test that a run is a function of its seed."""
        first = run(two_event_instance, seed=42)
        second = run(two_event_instance, seed=42)

        assert first.log == second.log
        assert first.assignment == second.assignment

    def test_non_termination(self, complementary_instance):
        """Test that complementary events exhaust any step budget."""
        with pytest.raises(NonTerminationError) as exc_info:
            run(complementary_instance, seed=1, max_steps=50)

        error = exc_info.value
        assert error.max_steps == 50
        assert error.log.T == 50
        assert not error.stats.terminated
        assert sum(error.stats.counts) == 50

    def test_rule_contract(self, complementary_instance):
        """Test that a rule choosing a false event is rejected."""
        with pytest.raises(RuleContractError):
            run(complementary_instance, rule=lambda assignment, true_ids, step: 7, seed=1)

    def test_randomized_rule_run(self, two_event_instance):
        """Test a run under the randomized rule."""
        result = run(two_event_instance, rule=RandomizedRule(8), seed=8)

        assert two_event_instance.true_events(result.assignment) == []


class TestExecutionLog:
    """Test cases for ExecutionLog and replay errors."""

    def make_log(self) -> ExecutionLog:
        return ExecutionLog(
            initial=(0, 0, 0),
            steps=[
                LogStep(t=1, event=0, values=(0, 1)),
                LogStep(t=2, event=1, values=(0, 0)),
                LogStep(t=3, event=0, values=(1, 0)),
            ],
        )

    def test_accessors(self):
        """Test event lookup by step."""
        log = self.make_log()

        assert log.T == 3
        assert log.events() == [0, 1, 0]
        assert log.event_at(2) == 1
        with pytest.raises(IndexError):
            log.event_at(0)

    def test_jsonl(self):
        """Test the JSON-lines form."""
        log = self.make_log()

        text = log.to_jsonl()

        assert text.splitlines()[0] == '{"initial": [0, 0, 0]}'
        assert ExecutionLog.from_jsonl(text) == log

    def test_jsonl_requires_initial(self):
        """Test that a log without its initial record is rejected."""
        with pytest.raises(ValueError):
            ExecutionLog.from_jsonl('{"t": 1, "event": 0, "values": [1]}\n')

    def test_replay_states(self, two_event_instance):
        """Test the assignments rebuilt from a handmade log."""
        states = replay(two_event_instance, self.make_log())

        assert states == [[0, 0, 0], [0, 1, 0], [0, 0, 0], [1, 0, 0]]

    def test_replay_false_event(self, two_event_instance):
        """Test a log resampling an event that was not true."""
        log = ExecutionLog(initial=(1, 1, 1), steps=[LogStep(t=1, event=0, values=(0, 0))])

        with pytest.raises(LogReplayError) as exc_info:
            replay(two_event_instance, log)

        assert exc_info.value.step == 1

    def test_replay_wrong_width(self, two_event_instance):
        """Test a log whose initial assignment has the wrong length."""
        with pytest.raises(LogReplayError):
            replay(two_event_instance, ExecutionLog(initial=(0, 0)))


class TestBatches:
    """Test cases for batch runs and statistics."""

    def test_run_seeds(self):
        """Test derived per-run seeds."""
        seeds = run_seeds(5, 4)

        assert seeds == run_seeds(5, 4)
        assert len(set(seeds)) == 4

    def test_batch_matches_single_runs(self, two_event_instance):
        """Test that threaded batches return runs in seed order."""
        seeds = [1, 2, 3, 4]

        batch = run_batch(two_event_instance, seeds, workers=2)

        assert [r.log for r in batch] == [run(two_event_instance, seed=s).log for s in seeds]

    def test_batch_propagates_non_termination(self, complementary_instance):
        """Test that a failing run fails the batch."""
        with pytest.raises(NonTerminationError):
            run_batch(complementary_instance, [1, 2], max_steps=10, workers=1)

    def test_batch_logs_failed_positions(self, two_event_instance, complementary_instance, caplog):
        """Test the warning that names every failed batch position."""
        caplog.set_level(logging.WARNING, logger="mt_engine.sequential")

        with pytest.raises(NonTerminationError):
            run_batch(complementary_instance, [1, 2, 3], max_steps=10, workers=2)

        assert "3 of 3 runs did not finish, batch positions [0, 1, 2]" in caplog.text
        caplog.clear()
        run_batch(two_event_instance, [1, 2], workers=1)
        assert caplog.text == ""

    def test_resample_statistics(self, two_event_instance):
        """Test mean resampling counts against the event weights."""
        mu = MuVector.of([0.5, 0.5])

        summary = resample_statistics(two_event_instance, runs=400, seed=7, workers=1)

        assert summary.runs == 400
        for mean, bound in zip(summary.mean, summary.upper_bounds(mu), strict=True):
            assert mean <= bound
        assert summary.to_dict()["mean_steps"] == pytest.approx(sum(summary.mean))


class TestDistribution:
    """Test cases for the output distribution bound."""

    def test_bound(self, two_event_instance):
        """Test the bound for an outside event."""
        mu = MuVector.of([0.5, 0.5])

        assert distribution_bound(two_event_instance, mu, BadEvent.of(0, [(0, 1)])) == (
            pytest.approx(0.75)
        )

    def test_estimate(self, two_event_instance):
        """Test the empirical frequency of an outside event."""
        mu = MuVector.of([0.5, 0.5])

        estimate = estimate_event_probability(
            two_event_instance, mu, BadEvent.of(0, [(0, 1)]), runs=300, seed=2, workers=1
        )

        assert estimate.runs == 300
        assert estimate.frequency == estimate.hits / 300
        assert estimate.frequency <= estimate.bound + 3 * estimate.sd

    def test_rejects_instance_event(self, two_event_instance):
        """Test that the target must lie outside the instance."""
        with pytest.raises(ValueError):
            estimate_event_probability(
                two_event_instance, MuVector.of([0.5, 0.5]), two_event_instance.events[1], runs=5
            )

    def test_rejects_zero_runs(self, two_event_instance):
        """Test that at least one run is needed."""
        with pytest.raises(ValueError):
            estimate_event_probability(
                two_event_instance, MuVector.of([0.5, 0.5]), BadEvent.of(0, [(2, 1)]), runs=0
            )
