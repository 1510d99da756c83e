"""Noise models a denoiser can be told about.

White{sigma}: i.i.d. Gaussian, per-entry variance sigma^2 (complex grids:
circular, sigma^2/2 per part). SubbandDiagonal{tau}: Gaussian with a
covariance that is diagonal in the wavelet domain, per-coefficient variance
tau_j on subband j (complex: circular with tau_j/2 per part).
"""

from dataclasses import dataclass, field

import numpy as np

from .wavelets import WaveletSpec

__all__ = ["White", "SubbandDiagonal", "subband_variances"]


@dataclass(frozen=True)
class White:
    sigma: float

    def __post_init__(self):
        if not np.isfinite(self.sigma) or self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


@dataclass(frozen=True)
class SubbandDiagonal:
    tau: np.ndarray
    spec: WaveletSpec = field(default_factory=WaveletSpec)

    def __post_init__(self):
        tau = np.asarray(self.tau, dtype=np.float64)
        if tau.shape != (self.spec.subband_count,):
            raise ValueError(
                f"tau must have length {self.spec.subband_count}, "
                f"got shape {tau.shape}"
            )
        if not np.all(np.isfinite(tau)) or np.any(tau < 0):
            raise ValueError("tau entries must be finite and >= 0")
        if not np.any(tau > 0):
            raise ValueError("tau must have at least one positive entry")
        object.__setattr__(self, "tau", tau)


def subband_variances(noise, spec: WaveletSpec) -> np.ndarray:
    """Per-subband per-coefficient variance vector for either model."""
    if isinstance(noise, White):
        return np.full(spec.subband_count, noise.sigma ** 2)
    if isinstance(noise, SubbandDiagonal):
        if noise.spec.levels != spec.levels:
            raise ValueError(
                f"noise model uses {noise.spec.levels} levels, expected {spec.levels}"
            )
        return noise.tau
    raise TypeError(f"not a noise model: {noise!r}")
