"""Deterministic derivation of independent random number streams.

Every stochastic routine in the package draws from generators produced here.
A stream is identified by (master seed, integer key path); the same pair
always yields the same generator, regardless of how many worker threads
consume sibling streams.  That is what makes sampler output byte-identical
across thread counts.
"""

from __future__ import annotations

import numpy as np

__all__ = ["child_rng", "spawn_rngs"]


def child_rng(seed: int, *key: int) -> np.random.Generator:
    """Generator for the stream addressed by ``key`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.default_rng(ss)


def spawn_rngs(seed: int, count: int, *prefix: int) -> list:
    """Generators for streams ``prefix + (0,) .. prefix + (count-1,)``."""
    return [child_rng(seed, *prefix, i) for i in range(count)]
