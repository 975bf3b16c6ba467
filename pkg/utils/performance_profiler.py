"""Wall-time and resident-memory measurement for solver phases.

Subcommands wrap their phases (parsing, criterion search, runs) in
``profile_section`` blocks; the collected metrics are attached to the JSON
output under ``timing``.
"""

import logging
import time
from collections.abc import Generator
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

import psutil

logger = logging.getLogger(__name__)

MEGABYTE = 1024 * 1024


def resident_memory() -> int:
    """Resident set size of this process in bytes, 0 if it cannot be read."""
    try:
        return int(psutil.Process().memory_info().rss)
    except psutil.Error as e:
        logger.debug(f"Could not read process memory: {e}")
        return 0


@dataclass
class PerformanceMetrics:
    """Duration and memory of one profiled section."""

    name: str
    duration: float
    memory_start: int = 0
    memory_end: int = 0

    @property
    def memory_delta(self) -> int:
        return self.memory_end - self.memory_start

    def to_dict(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "duration": self.duration,
            "memory_mb": self.memory_end / MEGABYTE,
            "memory_delta_mb": self.memory_delta / MEGABYTE,
        }


@dataclass
class PerformanceReport:
    total_duration: float
    peak_memory: int
    metrics: list[PerformanceMetrics] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "total_duration": self.total_duration,
            "peak_memory_mb": self.peak_memory / MEGABYTE,
            "sections": [m.to_dict() for m in self.metrics],
        }


class PerformanceProfiler:
    """Collects metrics for named, possibly nested, sections."""

    def __init__(self) -> None:
        self.metrics: list[PerformanceMetrics] = []
        self._start_times: dict[str, float] = {}
        self._memory_start: dict[str, int] = {}

    def start_profiling(self, name: str) -> None:
        self._start_times[name] = time.perf_counter()
        self._memory_start[name] = resident_memory()
        logger.debug(f"Started profiling: {name}")

    def stop_profiling(self, name: str) -> PerformanceMetrics:
        """Stop profiling a section and record its metrics.

        Args:
            name: Name given to ``start_profiling``

        Returns:
            Metrics of the section; zero duration if it was never started
        """
        if name not in self._start_times:
            logger.warning(f"No profiling started for: {name}")
            return PerformanceMetrics(name=name, duration=0.0)

        metrics = PerformanceMetrics(
            name=name,
            duration=time.perf_counter() - self._start_times.pop(name),
            memory_start=self._memory_start.pop(name, 0),
            memory_end=resident_memory(),
        )
        self.metrics.append(metrics)
        logger.debug(f"Stopped profiling: {name} (duration: {metrics.duration:.3f}s)")
        return metrics

    @contextmanager
    def profile_section(self, name: str) -> Generator[None, None, None]:
        self.start_profiling(name)
        try:
            yield
        finally:
            self.stop_profiling(name)

    def generate_report(self) -> PerformanceReport:
        return PerformanceReport(
            total_duration=sum(m.duration for m in self.metrics),
            peak_memory=max((m.memory_end for m in self.metrics), default=0),
            metrics=list(self.metrics),
        )

    def clear_metrics(self) -> None:
        self.metrics.clear()
        self._start_times.clear()
        self._memory_start.clear()
