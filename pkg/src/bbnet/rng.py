"""Seed derivation and RNG construction.

All randomness flows through numpy Generators seeded with 64-bit integers.
Independent sub-streams (one per sweep cell and seed index) are derived from
the master seed with splitmix64, so results never depend on scheduling or
worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15

# Index-space tag for the omega-estimator stream, far away from cell indices.
OMEGA_STREAM_TAG = 0x6F6D6567_6174_0001


def splitmix64(state: int) -> int:
    """Output of one splitmix64 step for the given 64-bit state."""
    z = (state + _GOLDEN) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


def derive_seed(master_seed: int, *indices: int) -> int:
    """Mix a master seed and integer indices into an independent 64-bit seed.

    The mixing function is fixed and documented so that re-runs (including
    parallel ones) always assign the same seed to the same (cell, repeat).
    """
    x = splitmix64(master_seed & _MASK64)
    for ix in indices:
        x = splitmix64(x ^ ((int(ix) + 1) & _MASK64))
    return x


def rng_from_seed(seed: int) -> np.random.Generator:
    """PCG64 generator for a 64-bit seed."""
    return np.random.Generator(np.random.PCG64(seed & _MASK64))
