"""Pytest configuration and shared fixtures.

This module provides the small instances used across the engine,
application and command-line tests.
"""

import logging
import tempfile
from collections.abc import Callable, Generator
from pathlib import Path

import numpy as np
import pytest

from mt_engine.model import Instance, VariableSpace


@pytest.fixture
def temp_dir() -> Generator[Path, None, None]:
    """Create a temporary directory for testing.

    Yields:
        Path: Temporary directory path
    """
    with tempfile.TemporaryDirectory() as tmpdir:
        yield Path(tmpdir)


@pytest.fixture
def two_event_instance() -> Instance:
    """Three fair bits with events {X0=0, X1=0} and {X1=1, X2=0}.

    Both events have weight 1/2 at the least fixed point.
    """
    return Instance.from_terms(VariableSpace.uniform(3), [[(0, 0), (1, 0)], [(1, 1), (2, 0)]])


@pytest.fixture
def complementary_instance() -> Instance:
    """One fair bit and both of its values as bad-events; no run ever terminates."""
    return Instance.from_terms(VariableSpace.uniform(1), [[(0, 0)], [(0, 1)]])


@pytest.fixture
def lone_event_instance() -> Instance:
    """A single event of probability 1/4 with no neighbors."""
    return Instance.from_terms(VariableSpace.uniform(2), [[(0, 0), (1, 0)]])


def make_random_instance(
    seed: int,
    max_vars: int = 10,
    max_events: int = 8,
    max_domain: int = 3,
    max_event_size: int = 3,
    min_domain: int = 1,
) -> Instance:
    """Random valid instance with Dirichlet value probabilities.

    Args:
        seed: Seed of the generator
        max_vars: Upper bound on the variable count
        max_events: Upper bound on the event count
        max_domain: Upper bound on every domain size
        max_event_size: Upper bound on the number of terms per event
        min_domain: Lower bound on every domain size

    Returns:
        Instance with at least one variable and one event
    """
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_vars + 1))
    sizes = [int(rng.integers(min_domain, max_domain + 1)) for _ in range(n)]
    probs = []
    for size in sizes:
        weights = rng.dirichlet(np.ones(size))
        values = [float(w) for w in weights[:-1]]
        values.append(max(0.0, 1.0 - sum(values)))
        probs.append(tuple(values))
    space = VariableSpace(
        domains=tuple(tuple(range(size)) for size in sizes), probs=tuple(probs)
    )

    m = int(rng.integers(1, max_events + 1))
    events = []
    for _ in range(m):
        size = int(rng.integers(1, min(max_event_size, n) + 1))
        variables = rng.choice(n, size=size, replace=False)
        events.append([(int(v), int(rng.integers(sizes[int(v)]))) for v in variables])
    return Instance.from_terms(space, events)


@pytest.fixture
def random_small_instance() -> Callable[..., Instance]:
    """Factory of random small instances, see :func:`make_random_instance`."""
    return make_random_instance


@pytest.fixture
def restore_logging() -> Generator[None, None, None]:
    """Undo the root logger changes made by the command line."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    yield
    root.handlers[:] = handlers
    root.setLevel(level)
