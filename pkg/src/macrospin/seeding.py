"""Deterministic seed derivation for disorder and state streams.

Every random draw in a batch run is seeded by a 64-bit hash mix of
(master_seed, stream name, indices).  Identical inputs give identical
streams on any platform, in any execution order, which is what makes
record streams replayable.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    # SplitMix64 finalizer
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def _fnv1a64(text: str) -> int:
    h = 0xCBF29CE484222325
    for byte in text.encode("utf-8"):
        h = ((h ^ byte) * 0x100000001B3) & _MASK64
    return h


def derive_seed(master_seed: int, stream: str, *indices: int) -> int:
    """Counter-based 64-bit seed for the given stream and index tuple."""
    s = _mix64(master_seed & _MASK64)
    s = _mix64(s ^ _fnv1a64(stream))
    for idx in indices:
        s = _mix64(s ^ (idx & _MASK64))
    return s


def rng_from(master_seed: int, stream: str, *indices: int) -> np.random.Generator:
    """PCG64 generator seeded by derive_seed(master_seed, stream, *indices)."""
    return np.random.Generator(np.random.PCG64(derive_seed(master_seed, stream, *indices)))
