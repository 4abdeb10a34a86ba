"""Seed handling.

Every random draw in the package goes through a Philox (counter-based)
generator.  Child streams are addressed by integer keys derived from one
root seed, so work can be split across processes without changing results.
"""
from __future__ import annotations

import numpy as np

SeedLike = "int | np.random.SeedSequence | np.random.Generator | None"


def make_rng(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(seed))


def child_seed(root: int, *key: int) -> np.random.SeedSequence:
    """Deterministic sub-stream of ``root`` addressed by ``key``."""
    return np.random.SeedSequence(root, spawn_key=tuple(int(k) for k in key))


def child_rng(root: int, *key: int) -> np.random.Generator:
    return make_rng(child_seed(root, *key))
