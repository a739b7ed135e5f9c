"""Deterministic seed plumbing for block-structured Monte Carlo loops."""

from __future__ import annotations

import numpy as np

Seed = int | np.random.SeedSequence | None


def as_seed_sequence(seed: Seed) -> np.random.SeedSequence:
    if isinstance(seed, np.random.SeedSequence):
        return seed
    return np.random.SeedSequence(seed)


def point_seed(base_seed: int, index: int) -> np.random.SeedSequence:
    """Independent stream for sweep point ``index`` of an experiment."""
    return np.random.SeedSequence(entropy=base_seed, spawn_key=(index,))


def chunk_sizes(n: int, block: int) -> list[int]:
    """Fixed partition of ``n`` trials into blocks; the tail block is short."""
    sizes = [block] * (n // block)
    if n % block:
        sizes.append(n % block)
    return sizes
