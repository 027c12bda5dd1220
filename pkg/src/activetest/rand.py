"""Seedable, splittable random streams.

Every scenario / sampling call derives an independent generator from
(master seed, *key), so parallel or reordered execution reproduces the
serial results.
"""

from __future__ import annotations

import numpy as np


def derive_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence((int(seed),) + tuple(int(k) for k in key))))


def random_assignment(names, rng: np.random.Generator) -> dict[str, bool]:
    """Uniform total assignment over the given variables."""
    names = list(names)
    bits = rng.integers(0, 2, size=len(names))
    return {n: bool(b) for n, b in zip(names, bits)}
