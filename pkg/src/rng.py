"""
Deterministic random streams.

Every random draw in relcut comes from a counter-based Philox generator
keyed by (seed, stream, *indices). Results therefore do not depend on how
work is split across threads.
"""

from enum import IntEnum

import numpy as np


class Stream(IntEnum):
    """Stream tags separating the independent uses of a seed."""

    GATE = 1
    MONTE_CARLO = 2
    CONTRACTION = 3
    RCA = 4
    RCA2 = 5
    ESTIMATOR = 6
    HASH = 7
    TAIL = 8
    SURVIVAL = 9


def derive_rng(seed: int, stream: Stream, *indices: int) -> np.random.Generator:
    """Returns the generator for ``(seed, stream, *indices)``."""
    key = (int(stream),) + tuple(int(i) for i in indices)
    sequence = np.random.SeedSequence(entropy=int(seed), spawn_key=key)
    return np.random.Generator(np.random.Philox(sequence))


def random_seed() -> int:
    """Draws a fresh 64-bit seed from OS entropy (for ``--seed random``)."""
    return int(np.random.SeedSequence().entropy) % (1 << 64)
