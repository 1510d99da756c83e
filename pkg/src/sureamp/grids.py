"""Seeded sampling of real and complex image grids.

Grids are plain 2-D numpy arrays (float64 or complex128), row-major,
finite everywhere. Complex grids follow the circular convention: real and
imaginary parts are independent with half the per-entry variance each.
"""

import numpy as np

from .rng import SeededRng
from .validation import check_nonnegative

__all__ = ["sample_gaussian_grid"]


def sample_gaussian_grid(rng: SeededRng, h: int, w: int, sigma: float,
                         complex: bool = False) -> np.ndarray:
    """I.i.d. N(0, sigma^2) grid; complex entries get sigma^2/2 per part.

    sigma = 0 yields an all-zero grid. The underlying standard-normal draws
    are consumed regardless of sigma so streams stay aligned.
    """
    check_nonnegative(sigma, "sigma")
    if h < 1 or w < 1:
        raise ValueError(f"grid dims must be positive, got {h}x{w}")
    gen = rng.generator()
    if complex:
        re = gen.standard_normal((h, w))
        im = gen.standard_normal((h, w))
        return (sigma / np.sqrt(2.0)) * (re + 1j * im)
    return sigma * gen.standard_normal((h, w))
