"""Batch execution of independent seeded runs.

Runs are submitted to a thread pool and their outcomes collected in
submission order, so a batch is reproducible no matter how many workers
execute it or in which order they finish.
"""

import concurrent.futures
import logging
import os
import threading
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from typing import Any, Generic, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV_VAR = "LOPSIDED_MT_WORKERS"
MAX_DEFAULT_WORKERS = 8


def default_workers() -> int:
    """Worker count from ``LOPSIDED_MT_WORKERS``, else ``min(8, cpu_count)``."""
    raw = os.environ.get(WORKERS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
        except ValueError:
            logger.warning(f"Ignoring non-integer {WORKERS_ENV_VAR}={raw!r}")
        else:
            if value >= 1:
                return value
            logger.warning(f"Ignoring non-positive {WORKERS_ENV_VAR}={value}")
    return min(MAX_DEFAULT_WORKERS, os.cpu_count() or 1)


@dataclass
class BatchOutcome(Generic[R]):
    """Result or error of one item in a batch."""

    index: int
    result: R | None = None
    error: Exception | None = None
    start_time: float = 0.0
    end_time: float = 0.0
    worker_id: str | None = None

    @property
    def duration(self) -> float:
        return self.end_time - self.start_time if self.end_time > self.start_time else 0.0

    @property
    def success(self) -> bool:
        return self.error is None


class BatchRunner:
    """Maps a function over items on a thread pool, preserving item order."""

    def __init__(self, max_workers: int | None = None):
        """Initialize the runner.

        Args:
            max_workers: Thread count; ``None`` uses :func:`default_workers`
        """
        if max_workers is not None and max_workers < 1:
            raise ValueError(f"max_workers must be positive, got {max_workers}")
        self.max_workers = max_workers or default_workers()

    def map(self, func: Callable[[T], R], items: Sequence[T]) -> list[BatchOutcome[R]]:
        """Apply ``func`` to every item and return outcomes in item order.

        Exceptions raised by ``func`` are captured in the outcome, never raised.
        """
        if not items:
            return []
        if self.max_workers == 1 or len(items) == 1:
            return [self._execute(func, index, item) for index, item in enumerate(items)]

        logger.debug(f"Running batch of {len(items)} on {self.max_workers} threads")
        outcomes: list[BatchOutcome[R] | None] = [None] * len(items)
        with concurrent.futures.ThreadPoolExecutor(
            max_workers=min(self.max_workers, len(items))
        ) as executor:
            futures = {
                executor.submit(self._execute, func, index, item): index
                for index, item in enumerate(items)
            }
            for future in concurrent.futures.as_completed(futures):
                outcomes[futures[future]] = future.result()
        return [outcome for outcome in outcomes if outcome is not None]

    def _execute(self, func: Callable[[T], R], index: int, item: T) -> BatchOutcome[R]:
        outcome: BatchOutcome[R] = BatchOutcome(
            index=index, start_time=time.time(), worker_id=threading.current_thread().name
        )
        try:
            outcome.result = func(item)
        except Exception as e:
            outcome.error = e
            logger.debug(f"Batch item {index} failed: {e}")
        finally:
            outcome.end_time = time.time()
        return outcome


def batch_statistics(outcomes: Sequence[BatchOutcome[Any]]) -> dict[str, Any]:
    """Summary of a finished batch."""
    succeeded = [o for o in outcomes if o.success]
    return {
        "total": len(outcomes),
        "succeeded": len(succeeded),
        "failed": len(outcomes) - len(succeeded),
        "total_time": sum(o.duration for o in outcomes),
        "max_time": max((o.duration for o in succeeded), default=0.0),
        "failed_indices": [o.index for o in outcomes if not o.success],
    }
