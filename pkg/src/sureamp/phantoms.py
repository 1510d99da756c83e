"""Deterministic test images.

blocks_phantom is piecewise constant on dyadic-ish rectangles, so it is
sparse in the Haar pyramid; spike_image is sparse in the sample domain.
"""

import numpy as np

from .rng import SeededRng

__all__ = ["blocks_phantom", "spike_image", "complex_phantom"]


def blocks_phantom(h: int, w: int) -> np.ndarray:
    """Nested rectangles and a bar, values in [0, 1]."""
    img = np.full((h, w), 0.15)
    img[h // 8: 7 * h // 8, w // 8: 7 * w // 8] = 0.45
    img[h // 4: 3 * h // 4, w // 4: 3 * w // 4] = 0.75
    img[3 * h // 8: 5 * h // 8, 3 * w // 8: 5 * w // 8] = 1.0
    img[h // 16: 3 * h // 16, w // 16: 15 * w // 16] = 0.9   # top bar
    img[5 * h // 8: 13 * h // 16, 5 * w // 16: 7 * w // 16] = 0.05
    return img


def spike_image(rng: SeededRng, h: int, w: int, k: int,
                amplitude: float = 1.0) -> np.ndarray:
    """k spikes of +-amplitude at distinct random positions."""
    if not 0 < k <= h * w:
        raise ValueError(f"k must lie in [1, {h * w}], got {k}")
    gen = rng.generator()
    idx = gen.choice(h * w, size=k, replace=False)
    signs = np.where(gen.random(k) < 0.5, -1.0, 1.0)
    img = np.zeros(h * w)
    img[idx] = amplitude * signs
    return img.reshape(h, w)


def complex_phantom(h: int, w: int) -> np.ndarray:
    """Blocks magnitude with a transposed-blocks imaginary part."""
    return blocks_phantom(h, w) + 0.3j * blocks_phantom(w, h).T
