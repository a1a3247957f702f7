"""Deterministic RNG substreams derived from one master seed.

Every source of randomness (graph draws, attributes, feature frequencies,
permutations, trial indices) pulls from a named substream so that a single
seed reproduces an entire run bit for bit, independent of scheduling order.
"""

from __future__ import annotations

import zlib

import numpy as np


def _token(part) -> int:
    if isinstance(part, (int, np.integer)):
        return int(part) & 0xFFFFFFFF
    return zlib.crc32(str(part).encode())


def seed_for(master: int, *path) -> int:
    """Stable child seed for the substream named by ``path`` under ``master``."""
    entropy = [int(master) & 0xFFFFFFFFFFFFFFFF] + [_token(p) for p in path]
    ss = np.random.SeedSequence(entropy)
    return int(ss.generate_state(1, np.uint64)[0])


def rng_for(master: int, *path) -> np.random.Generator:
    """Generator seeded from the ``(master, *path)`` substream."""
    return np.random.default_rng(seed_for(master, *path))
