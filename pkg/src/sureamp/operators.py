"""Measurement operators: dense Gaussian matrices and masked Fourier.

Both expose forward (grid -> measurement vector) and adjoint (vector ->
grid), and the adjoint is the exact conjugate transpose of the forward map
(verified by dot-tests). The Fourier operator uses the unitary DFT with a
zero-frequency-centered mask layout, so a full mask is an isometry.
"""

import numpy as np

from .rng import SeededRng
from .validation import check_grid

__all__ = [
    "GaussianOperator",
    "FourierMaskOperator",
    "make_gaussian_operator",
    "make_vd_mask",
    "full_mask_operator",
]


class GaussianOperator:
    """Dense m x n sensing matrix acting on flattened (h, w) grids."""

    def __init__(self, entries, shape):
        entries = np.asarray(entries, dtype=np.float64)
        if entries.ndim != 2:
            raise ValueError("entries must be a 2-D matrix")
        h, w = shape
        self.m, self.n = entries.shape
        if self.n != h * w:
            raise ValueError(
                f"matrix has {self.n} columns but grid shape {h}x{w} needs {h * w}"
            )
        self.shape = (int(h), int(w))
        self.entries = entries

    def forward(self, x) -> np.ndarray:
        x = check_grid(x, "x")
        if x.shape != self.shape:
            raise ValueError(f"expected grid {self.shape}, got {x.shape}")
        return self.entries @ x.ravel()

    def adjoint(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=np.float64)
        if y.shape != (self.m,):
            raise ValueError(f"expected measurement vector ({self.m},), got {y.shape}")
        return (self.entries.T @ y).reshape(self.shape)


def make_gaussian_operator(rng: SeededRng, m: int, shape) -> GaussianOperator:
    """I.i.d. N(0, 1/m) entries so column norms concentrate near 1."""
    h, w = shape
    n = h * w
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if m > n:
        raise ValueError(f"m = {m} exceeds n = {n}; undersampling requires m <= n")
    entries = rng.generator().standard_normal((m, n)) / np.sqrt(m)
    return GaussianOperator(entries, shape)


class FourierMaskOperator:
    """Mask-select of the unitary 2-D DFT (k-space centered layout).

    mask: boolean (h, w) grid of selected locations; prob: the selection
    probabilities the mask was drawn from (1 on the fully sampled center).
    Measurements are the selected coefficients of fftshift(fft2(x)/sqrt(hw)),
    in row-major order of the mask.
    """

    def __init__(self, mask, prob):
        mask = np.asarray(mask)
        if mask.dtype != np.bool_:
            mask = mask.astype(bool)
        prob = np.asarray(prob, dtype=np.float64)
        if mask.ndim != 2 or mask.shape != prob.shape:
            raise ValueError("mask and prob must be 2-D grids of the same shape")
        if np.any((prob <= 0) & mask):
            raise ValueError("selected locations must have prob > 0")
        if np.any(prob > 1) or np.any(prob < 0):
            raise ValueError("prob must lie in [0, 1]")
        self.h, self.w = mask.shape
        self.mask = mask
        self.prob = prob
        self.m = int(mask.sum())
        self.shape = (self.h, self.w)

    def forward(self, x) -> np.ndarray:
        x = check_grid(x, "x")
        if x.shape != self.shape:
            raise ValueError(f"expected grid {self.shape}, got {x.shape}")
        spectrum = np.fft.fftshift(np.fft.fft2(x, norm="ortho"))
        return spectrum[self.mask]

    def _fill(self, y):
        y = np.asarray(y, dtype=np.complex128)
        if y.shape != (self.m,):
            raise ValueError(f"expected measurement vector ({self.m},), got {y.shape}")
        grid = np.zeros(self.shape, dtype=np.complex128)
        grid[self.mask] = y
        return grid

    def adjoint(self, y) -> np.ndarray:
        """Zero-fill then inverse unitary DFT (exact conjugate transpose)."""
        return np.fft.ifft2(np.fft.ifftshift(self._fill(y)), norm="ortho")

    def adjoint_weighted(self, y) -> np.ndarray:
        """Density-compensated adjoint: samples scaled by 1/prob first."""
        grid = self._fill(y)
        grid[self.mask] /= self.prob[self.mask]
        return np.fft.ifft2(np.fft.ifftshift(grid), norm="ortho")


def full_mask_operator(h: int, w: int) -> FourierMaskOperator:
    """Fully sampled Fourier operator (unitary; adjoint inverts forward)."""
    return FourierMaskOperator(np.ones((h, w), dtype=bool), np.ones((h, w)))


def _radius_grid(h, w):
    ky = np.arange(h) - h // 2
    kx = np.arange(w) - w // 2
    r = np.hypot(ky[:, None], kx[None, :])
    return r / r.max()


def make_vd_mask(rng: SeededRng, h: int, w: int, rate: float,
                 degree: int = 6, center_fraction: float = 0.02) -> FourierMaskOperator:
    """Polynomial variable-density sampling mask with an exact sample count.

    prob(k) = min(1, c * (1 - ||k||/||k||_max)^degree) outside the fully
    sampled center disk (normalized radius <= center_fraction), with c
    calibrated by bisection so that sum(prob) hits round(rate*h*w). The mask
    is drawn Bernoulli(prob), then adjusted to the exact target count by
    flipping the selections closest to their probability boundary.
    """
    if not 0 < rate < 1:
        raise ValueError(f"rate must lie in (0, 1), got {rate}")
    if degree < 0:
        raise ValueError(f"degree must be >= 0, got {degree}")
    if not 0 <= center_fraction < 1:
        raise ValueError(f"center_fraction must lie in [0, 1), got {center_fraction}")
    target = int(round(rate * h * w))
    rho = _radius_grid(h, w)
    center = rho <= center_fraction
    n_center = int(center.sum())
    if target < n_center:
        raise ValueError(
            f"rate {rate} gives {target} samples, fewer than the fully "
            f"sampled center ({n_center}); shrink center_fraction or raise rate"
        )
    base = (1.0 - rho) ** degree

    def prob_for(c):
        p = np.minimum(1.0, c * base)
        p[center] = 1.0
        return p

    lo, hi = 0.0, 1.0
    while prob_for(hi).sum() < target and hi < 1e9:
        hi *= 2.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if prob_for(mid).sum() < target:
            lo = mid
        else:
            hi = mid
    prob = prob_for(hi)

    u = rng.generator().random((h, w))
    mask = u < prob
    # Exact-count adjustment: flip entries nearest the decision boundary,
    # never touching the fully sampled center.
    excess = int(mask.sum()) - target
    if excess > 0:
        candidates = mask & ~center
        margin = np.where(candidates, prob - u, np.inf)
        drop = np.argsort(margin, axis=None)[:excess]
        mask.ravel()[drop] = False
    elif excess < 0:
        candidates = ~mask & (prob > 0)  # impossible locations stay out
        need = -excess
        if int(candidates.sum()) < need:
            raise ValueError(
                "cannot reach the target sample count: too few locations "
                "with positive probability; raise degree or rate")
        margin = np.where(candidates, u - prob, np.inf)
        add = np.argsort(margin, axis=None)[:need]
        mask.ravel()[add] = True
    return FourierMaskOperator(mask, prob)
