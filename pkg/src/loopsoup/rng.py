"""Counter-based random number streams.

Every stochastic routine in the package draws from a Philox generator keyed
by (seed, replica).  Distinct replicas give statistically independent
streams, and the same key always reproduces the same draws, which makes
parallel replica execution deterministic no matter how work is scheduled.
"""
from __future__ import annotations

import numpy as np

GENERATOR_ID = "philox4x64"

_MASK64 = (1 << 64) - 1


def stream(seed: int, replica: int = 0) -> np.random.Generator:
    """Generator for the given (seed, replica) key."""
    key = np.array([seed & _MASK64, replica & _MASK64], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))
