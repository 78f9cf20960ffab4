"""Deterministic seed derivation.

Every random stream in the library is derived from a user seed plus a tuple of integer
keys (restart index, iteration, pass, ...), so results never depend on call order or on
whether restarts run serially or on a thread pool.
"""

from __future__ import annotations

import numpy as np

_UINT64_MASK = (1 << 64) - 1


def _entropy(seed: int, keys: tuple[int, ...]) -> list[int]:
    return [int(seed) & _UINT64_MASK, *(int(k) & _UINT64_MASK for k in keys)]


def derive_seed(seed: int, *keys: int) -> int:
    """Return a 63-bit seed derived from ``seed`` and ``keys``."""
    state = np.random.SeedSequence(_entropy(seed, keys)).generate_state(2, dtype=np.uint32)
    return (int(state[0]) << 31) ^ int(state[1])


def make_rng(seed: int, *keys: int) -> np.random.Generator:
    """Return an independent generator for the stream identified by ``(seed, *keys)``."""
    return np.random.default_rng(np.random.SeedSequence(_entropy(seed, keys)))
