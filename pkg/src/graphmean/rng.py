"""Deterministic RNG streams for seeded, parallelizable experiments.

All randomness in the package flows from a single master seed through named
sub-streams keyed by integers (typically a cell index and a replicate index).
Streams are Philox counter-based generators, so replicates computed in
parallel and in serial draw exactly the same numbers.
"""

from __future__ import annotations

import numpy as np

# reserved first key for bookkeeping streams (bootstrap resampling etc.)
# so they can never collide with replicate streams
AUX_KEY = 0x7FFFFFFF


def stream(master_seed: int, *key: int) -> np.random.Generator:
    """Independent generator for the sub-task identified by `key`."""
    ss = np.random.SeedSequence(entropy=int(master_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))
