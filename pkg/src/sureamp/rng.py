"""Deterministic, splittable random streams.

Every stochastic operation in the package takes a SeededRng. Identical
(seed, stream) pairs produce identical sample sequences on every platform,
because the generator is a counter-based Philox keyed directly by the pair
(no OS entropy, no global state). Substreams isolate independent uses
(measurement noise vs. divergence probes vs. mask draws) so adding draws to
one consumer never perturbs another.
"""

from dataclasses import dataclass

import numpy as np

__all__ = ["SeededRng"]

_MASK64 = (1 << 64) - 1


def _splitmix64(z):
    # Standard splitmix64 finalizer; good avalanche for stream derivation.
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (z ^ (z >> 31)) & _MASK64


@dataclass(frozen=True)
class SeededRng:
    """A (seed, stream) pair naming one reproducible random sequence."""

    seed: int
    stream: int = 0

    def generator(self) -> np.random.Generator:
        """Fresh generator positioned at the start of this stream."""
        key = [self.seed & _MASK64, self.stream & _MASK64]
        return np.random.Generator(np.random.Philox(key=key))

    def substream(self, index: int) -> "SeededRng":
        """Derive an independent stream; substream(i) is stable under i."""
        mixed = _splitmix64((self.stream & _MASK64) ^ _splitmix64(index & _MASK64))
        return SeededRng(self.seed, mixed)

    # -- convenience draws (each call re-derives the stream start, so use a
    #    distinct substream per independent draw site) --

    def standard_normal(self, shape) -> np.ndarray:
        return self.generator().standard_normal(shape)

    def uniform(self, shape) -> np.ndarray:
        return self.generator().random(shape)
