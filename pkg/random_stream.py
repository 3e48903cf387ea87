"""Deterministic counter-based random substreams.

Every random draw made by a generator is addressed by the root seed plus a
derivation path ``(step index n, draw index k, purpose tag)``. The path is
fed to ``numpy.random.SeedSequence`` as its spawn key and the resulting seed
drives a Philox (counter-based) bit generator, so a substream never depends
on how many draws other substreams consumed, on thread counts, or on the
order in which substreams are created.
"""

from __future__ import annotations

from typing import Optional, Tuple

import numpy as np

SEED_MASK = (1 << 64) - 1

# Stable integer codes; changing them changes every generated sequence.
PURPOSES = {
    "init": 0,
    "candidates": 1,
    "accept": 2,
    "retry": 3,
    "rejection": 4,
    "start": 5,
    "sample": 6,
}


class RandomStream:
    """A reproducible stream of random draws keyed by ``(seed, path)``"""

    def __init__(self, seed: int, path: Tuple[int, ...] = ()):
        self.seed = int(seed) & SEED_MASK
        self.path = tuple(int(p) for p in path)
        self._rng: Optional[np.random.Generator] = None

    def substream(self, n: int, k: int = 0, purpose: str = "candidates") -> "RandomStream":
        """Derive the independent substream for step ``n``, draw ``k`` and ``purpose``"""
        if purpose not in PURPOSES:
            raise ValueError(f"unknown purpose tag: {purpose!r}")
        if n < 0 or k < 0:
            raise ValueError("step and draw indices must be non-negative")
        return RandomStream(self.seed, self.path + (n, k, PURPOSES[purpose]))

    @property
    def rng(self) -> np.random.Generator:
        """Philox generator for this path, built on first use"""
        if self._rng is None:
            seq = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
            self._rng = np.random.Generator(np.random.Philox(seq))
        return self._rng

    def uniform(self, size: Optional[int] = None):
        """Draws from U([0, 1))"""
        return self.rng.random(size)

    def __repr__(self) -> str:
        return f"RandomStream(seed={self.seed}, path={self.path})"
