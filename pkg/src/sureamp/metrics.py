"""Reconstruction quality metrics."""

import numpy as np

from .validation import check_grid, check_positive, check_same_shape

__all__ = ["mse", "psnr"]


def mse(a, b) -> float:
    """Mean squared error (1/n) sum |a_i - b_i|^2. Symmetric, >= 0."""
    a = check_grid(a, "a")
    b = check_grid(b, "b")
    check_same_shape(a, b, "a", "b")
    diff = a - b
    return float(np.mean(np.abs(diff) ** 2))


def psnr(a, b, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB; +inf when the grids are equal."""
    check_positive(peak, "peak")
    err = mse(a, b)
    if err == 0.0:
        return float("inf")
    return float(10.0 * np.log10(peak * peak / err))
