"""Orthonormal 2-D Haar wavelet transform with a flat pyramid layout.

The transform is fully orthonormal (each analysis step is unitary), so
Parseval holds to rounding and the inverse is the exact transpose. Image
dims must be divisible by 2**levels.

Coefficients live in a single array the same shape as the image, in the
usual pyramid arrangement: at each level the low-pass quadrant is recursed
into the top-left corner. Subbands are indexed

    0            -> coarsest approximation (the final low-pass block)
    1 + 3*k + s  -> detail bands from coarsest (k=0) to finest level,
                    s = 0: low-rows/high-cols, 1: high-rows/low-cols,
                    2: high-rows/high-cols

for a total of 3*levels + 1 bands.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .validation import check_grid

__all__ = [
    "WaveletSpec",
    "dwt2",
    "idwt2",
    "subband_map",
    "subband_slices",
    "subband_sizes",
]

_SQRT2 = np.sqrt(2.0)


@dataclass(frozen=True)
class WaveletSpec:
    """Transform configuration; Haar is the only kind."""

    levels: int = 4
    kind: str = "haar"

    def __post_init__(self):
        if self.kind != "haar":
            raise ValueError(f"unsupported wavelet kind {self.kind!r}")
        if self.levels < 1:
            raise ValueError("levels must be >= 1")

    @property
    def subband_count(self) -> int:
        return 3 * self.levels + 1

    @property
    def divisor(self) -> int:
        return 2 ** self.levels

    def check_dims(self, h: int, w: int):
        d = self.divisor
        if h % d or w % d:
            raise ValueError(
                f"grid dims {h}x{w} must be divisible by {d} "
                f"for a {self.levels}-level transform"
            )


def _analyze_axis1(x):
    a = x[:, 0::2]
    b = x[:, 1::2]
    return (a + b) / _SQRT2, (a - b) / _SQRT2


def _analyze_axis0(x):
    a = x[0::2, :]
    b = x[1::2, :]
    return (a + b) / _SQRT2, (a - b) / _SQRT2


def dwt2(x, spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Forward transform; returns the coefficient pyramid (same shape)."""
    x = check_grid(x, "x")
    h, w = x.shape
    spec.check_dims(h, w)
    out = x.copy()
    for _ in range(spec.levels):
        block = out[:h, :w]
        lo, hi = _analyze_axis1(block)
        ll, hl = _analyze_axis0(lo)   # hl: high rows, low cols
        lh, hh = _analyze_axis0(hi)   # lh: low rows, high cols
        h2, w2 = h // 2, w // 2
        block[:h2, :w2] = ll
        block[:h2, w2:w] = lh
        block[h2:h, :w2] = hl
        block[h2:h, w2:w] = hh
        h, w = h2, w2
    return out


def _synth_axis1(lo, hi):
    out = np.empty((lo.shape[0], lo.shape[1] * 2), dtype=lo.dtype)
    out[:, 0::2] = (lo + hi) / _SQRT2
    out[:, 1::2] = (lo - hi) / _SQRT2
    return out


def _synth_axis0(lo, hi):
    out = np.empty((lo.shape[0] * 2, lo.shape[1]), dtype=lo.dtype)
    out[0::2, :] = (lo + hi) / _SQRT2
    out[1::2, :] = (lo - hi) / _SQRT2
    return out


def idwt2(coeffs, spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Inverse transform; exact transpose of dwt2."""
    coeffs = check_grid(coeffs, "coeffs")
    H, W = coeffs.shape
    spec.check_dims(H, W)
    out = coeffs.copy()
    sizes = [(H >> k, W >> k) for k in range(spec.levels - 1, -1, -1)]
    for h, w in sizes:
        h2, w2 = h // 2, w // 2
        ll = out[:h2, :w2]
        lh = out[:h2, w2:w]
        hl = out[h2:h, :w2]
        hh = out[h2:h, w2:w]
        lo = _synth_axis0(ll, hl)
        hi = _synth_axis0(lh, hh)
        out[:h, :w] = _synth_axis1(lo, hi)
    return out


@lru_cache(maxsize=32)
def _subband_slices_cached(levels, h, w):
    spec = WaveletSpec(levels)
    spec.check_dims(h, w)
    slices = [None] * spec.subband_count
    hh, ww = h, w
    level_blocks = []
    for _ in range(levels):
        h2, w2 = hh // 2, ww // 2
        level_blocks.append((
            (slice(0, h2), slice(w2, ww)),    # low rows, high cols
            (slice(h2, hh), slice(0, w2)),    # high rows, low cols
            (slice(h2, hh), slice(w2, ww)),   # high rows, high cols
        ))
        hh, ww = h2, w2
    slices[0] = (slice(0, hh), slice(0, ww))
    # level_blocks[0] is the finest level; index coarsest-first.
    for k, blocks in enumerate(reversed(level_blocks)):
        for s, sl in enumerate(blocks):
            slices[1 + 3 * k + s] = sl
    return tuple(slices)


def subband_slices(spec: WaveletSpec, h: int, w: int):
    """Per-subband (row-slice, col-slice) into the coefficient pyramid."""
    return _subband_slices_cached(spec.levels, h, w)


def subband_map(spec: WaveletSpec, h: int, w: int) -> np.ndarray:
    """Integer grid assigning every coefficient its subband index."""
    out = np.full((h, w), -1, dtype=np.int64)
    for j, (rs, cs) in enumerate(subband_slices(spec, h, w)):
        out[rs, cs] = j
    return out


def subband_sizes(spec: WaveletSpec, h: int, w: int) -> np.ndarray:
    """Coefficient count per subband (sums to h*w)."""
    counts = np.empty(spec.subband_count, dtype=np.int64)
    for j, (rs, cs) in enumerate(subband_slices(spec, h, w)):
        counts[j] = (rs.stop - rs.start) * (cs.stop - cs.start)
    return counts
