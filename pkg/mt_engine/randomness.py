"""Keyed random substreams derived from one root seed.

Every random draw in the engine is addressed by a purpose tag and a tuple of
nonnegative integers (step, round, sub-round, event id, variable id, ...).
The key is fed to numpy's ``SeedSequence`` as its spawn key, so a draw depends
only on (root seed, purpose, key) and never on how many draws happened
before it. This is what lets the sequential, hybrid and parallel algorithms
share randomness bit for bit, and lets threaded executors reproduce
single-threaded traces.

Key layout per purpose:

=============  ==========================================  ==================
purpose        key                                         draws
=============  ==========================================  ==================
INITIAL        ()                                          one per variable
RESAMPLE       (step,)                                     one per event term
RULE           (step,)                                     one
PROPOSAL       (round, sub_round, event, variable)         one
PRIORITY       (round, sub_round, event)                   one
VCMEP          (round, edge)                               one
VCMEP_SEED     (round, sub_round)                          derived seed
RUN            (run_index,)                                derived seed
SAMPLE         (run_index,)                                free-form
=============  ==========================================  ==================
"""

from collections.abc import Sequence
from enum import IntEnum

import numpy as np

from mt_engine.model import VariableSpace


class Purpose(IntEnum):
    """Purpose tags; the integer value is the first spawn-key element."""

    INITIAL = 0
    RESAMPLE = 1
    RULE = 2
    PROPOSAL = 3
    PRIORITY = 4
    VCMEP = 5
    VCMEP_SEED = 6
    RUN = 7
    SAMPLE = 8


class KeyedStreams:
    """Factory of counter-keyed numpy generators for one root seed."""

    def __init__(self, root_seed: int) -> None:
        if root_seed < 0:
            raise ValueError(f"Root seed must be nonnegative, got {root_seed}")
        self.root_seed = int(root_seed)

    def generator(self, purpose: Purpose, *key: int) -> np.random.Generator:
        """Return the generator addressed by ``(purpose, *key)``."""
        sequence = np.random.SeedSequence(
            self.root_seed, spawn_key=(int(purpose), *(int(k) for k in key))
        )
        return np.random.default_rng(sequence)

    def uniforms(self, purpose: Purpose, *key: int, size: int) -> np.ndarray:
        """``size`` uniforms in [0, 1) from one keyed stream."""
        return self.generator(purpose, *key).random(size)

    def uniform(self, purpose: Purpose, *key: int) -> float:
        """A single uniform in [0, 1) from one keyed stream."""
        return float(self.generator(purpose, *key).random())

    def derive_seed(self, purpose: Purpose, *key: int) -> int:
        """A 63-bit seed for a nested computation (e.g. one batch run)."""
        sequence = np.random.SeedSequence(
            self.root_seed, spawn_key=(int(purpose), *(int(k) for k in key))
        )
        return int(sequence.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1))


def draw_values(
    space: VariableSpace, variables: Sequence[int], uniforms: Sequence[float]
) -> list[int]:
    """Convert uniforms into domain values of the given variables."""
    return [
        space.sample(variable, float(u)) for variable, u in zip(variables, uniforms, strict=True)
    ]


def initial_assignment(space: VariableSpace, streams: KeyedStreams) -> list[int]:
    """Draw every variable independently from the product measure."""
    if space.n == 0:
        return []
    return draw_values(space, range(space.n), streams.uniforms(Purpose.INITIAL, size=space.n))
