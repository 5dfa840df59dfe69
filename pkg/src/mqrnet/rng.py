"""Seeded random number generation.

The underlying stream is numpy's PCG64 bit generator, which produces an
identical sequence of uniform doubles for a given 64-bit seed on every
platform.  Gaussian draws are derived from that stream with the Box-Muller
transform (an exact transform, no rejection step), so every sampling path
in the package is a pure function of the seed.
"""

from __future__ import annotations

import numpy as np


class Rng:
    """Deterministic random source. Single-owner: never share across tasks."""

    def __init__(self, seed: int):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    def uniform(self, low: float = 0.0, high: float = 1.0, n: int | None = None):
        """Uniform draws on [low, high). Scalar if n is None, else shape (n,)."""
        u = self._gen.random(n)
        return low + (high - low) * u

    def normal(self, n: int) -> np.ndarray:
        """n standard normal draws via Box-Muller on pairs of uniforms."""
        pairs = (n + 1) // 2
        u1 = 1.0 - self._gen.random(pairs)  # in (0, 1]: keeps log finite
        u2 = self._gen.random(pairs)
        r = np.sqrt(-2.0 * np.log(u1))
        theta = 2.0 * np.pi * u2
        z = np.concatenate([r * np.cos(theta), r * np.sin(theta)])
        return z[:n]

    def integers(self, low: int, high: int, n: int | None = None):
        return self._gen.integers(low, high, size=n)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def spawn(self, *path: int) -> "Rng":
        """Child generator at a deterministic offset of this seed."""
        return Rng(derive_seed(self.seed, *path))


def derive_seed(base: int, *path) -> int:
    """Derive a child seed from a base seed and a mixing path.

    Path elements may be ints or short strings (hashed to ints); the same
    (base, path) always yields the same child seed.
    """
    key = []
    for p in path:
        if isinstance(p, str):
            # stable, platform-independent string hash
            h = 2166136261
            for byte in p.encode("utf-8"):
                h = ((h ^ byte) * 16777619) % 2**32
            key.append(h)
        else:
            key.append(int(p) % 2**32)
    ss = np.random.SeedSequence(entropy=int(base), spawn_key=tuple(key))
    return int(ss.generate_state(1, np.uint64)[0])
