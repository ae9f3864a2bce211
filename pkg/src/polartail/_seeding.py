"""Seed plumbing shared by the samplers."""

from __future__ import annotations

import numpy as np

from .errors import ParameterError


def seed_key(seed) -> tuple[int, ...]:
    """Normalize an int or tuple-of-ints seed into a stream key."""
    if isinstance(seed, (int, np.integer)) and not isinstance(seed, bool):
        return (int(seed),)
    if isinstance(seed, tuple) and seed and all(
        isinstance(s, (int, np.integer)) and not isinstance(s, bool) for s in seed
    ):
        return tuple(int(s) for s in seed)
    raise ParameterError(
        f"seed must be an int or a nonempty tuple of ints, got {seed!r}"
    )


def make_generator(seed) -> np.random.Generator:
    """Generator for a whole-run stream; passes Generators through."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(np.random.SeedSequence(seed_key(seed)))


def batch_generator(seed, batch_index: int) -> np.random.Generator:
    """Independent stream for one batch, a pure function of (seed, index)."""
    return np.random.default_rng(np.random.SeedSequence(seed_key(seed) + (batch_index,)))
