"""Seed handling shared by every simulator.

All randomness flows through :func:`numpy.random.default_rng`, so any
simulator accepts an ``int``, a :class:`numpy.random.SeedSequence` or an
existing :class:`numpy.random.Generator` as its ``seed``.  Replication
streams are derived from ``(master_seed, experiment_code, index)`` through
``SeedSequence.spawn_key``, which hashes the key into the generator state.
Replication ``i`` therefore gets the same stream regardless of how many
other replications exist or in which order they run.
"""
from __future__ import annotations

from typing import Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator, None]

MASK64 = (1 << 64) - 1


def as_generator(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, (int, np.integer)):
        seed = int(seed) & MASK64
    return np.random.default_rng(seed)


def substreams(seed: SeedLike, k: int) -> list[np.random.Generator]:
    """Split ``seed`` into ``k`` independent child generators."""
    return as_generator(seed).spawn(k)


def replication_seed(master_seed: int, code: int, index: int) -> np.random.SeedSequence:
    """Seed for replication ``index`` of the experiment identified by ``code``."""
    return np.random.SeedSequence(int(master_seed) & MASK64, spawn_key=(int(code), int(index)))
