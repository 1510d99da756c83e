"""Denoisers: wavelet soft-thresholding (fixed or SURE-tuned thresholds).

Every denoiser is a deterministic, shape-preserving map (grid, NoiseModel)
-> grid. Anything with a .denoise(grid, noise) method (or a bare callable
with that signature) plugs into the AMP loop and the risk estimators;
apply_denoiser() is the uniform entry point.

Complex grids are shrunk by magnitude, which preserves phase and reduces
to the real soft-thresholding rule on real inputs. The coarsest
approximation subband is never thresholded.
"""

import numpy as np
from sklearn.base import BaseEstimator

from .noise import subband_variances
from .validation import check_grid, check_nonnegative, check_positive
from .wavelets import WaveletSpec, dwt2, idwt2, subband_slices

__all__ = [
    "soft_threshold",
    "sure_tuned_threshold",
    "denoise_white",
    "denoise_subband",
    "WaveletThresholdDenoiser",
    "apply_denoiser",
]


def soft_threshold(values, lam: float):
    """Magnitude shrinkage v * max(0, 1 - lam/|v|); works on scalars/arrays."""
    check_nonnegative(lam, "lam")
    v = np.asarray(values)
    mag = np.abs(v)
    with np.errstate(divide="ignore", invalid="ignore"):
        scale = np.where(mag > lam, 1.0 - lam / np.where(mag > 0, mag, 1.0), 0.0)
    out = v * scale
    if np.isscalar(values) or np.ndim(values) == 0:
        return out[()]
    return out


def sure_tuned_threshold(subband_coeffs, sigma_j: float) -> float:
    """Threshold minimizing SURE of real soft-thresholding over the subband.

    The candidate set is {0} union {|coefficients|}; the minimization is
    exact over that grid (the classic SureShrink rule).
    """
    check_positive(sigma_j, "sigma_j")
    v = np.asarray(subband_coeffs).ravel()
    if v.size == 0:
        raise ValueError("subband is empty")
    if v.size < 2:
        raise ValueError("need at least 2 coefficients to tune a threshold")
    a = np.sort(np.abs(v.astype(np.float64)))
    n = a.size
    var = sigma_j ** 2
    lams = np.concatenate(([0.0], a))
    # k[i] = #{|v| <= lam_i}; sorted order makes all candidate SUREs O(n).
    k = np.searchsorted(a, lams, side="right")
    csum = np.concatenate(([0.0], np.cumsum(a ** 2)))
    penalty = csum[k] + (n - k) * lams ** 2          # ||S_lam(v) - v||^2
    survivors = n - k
    sure = penalty - n * var + 2.0 * var * survivors
    return float(lams[np.argmin(sure)])


def _sure_tuned_threshold_complex(v, tau_j):
    """Complex-magnitude variant; tau_j is the per-coefficient total variance."""
    a = np.sort(np.abs(np.asarray(v).ravel()))
    n = a.size
    lams = np.concatenate(([0.0], a))
    k = np.searchsorted(a, lams, side="right")
    csum = np.concatenate(([0.0], np.cumsum(a ** 2)))
    penalty = csum[k] + (n - k) * lams ** 2
    # Divergence of magnitude shrinkage over the 2n real coordinates:
    # sum_{|v|>lam} (2 - lam/|v|).
    with np.errstate(divide="ignore"):
        inv = np.where(a > 0, 1.0 / a, 0.0)
    inv_suffix = np.concatenate(([0.0], np.cumsum(inv[::-1])))[::-1]
    div = 2.0 * (n - k) - lams * inv_suffix[k]
    sure = penalty - n * tau_j + tau_j * div
    return float(lams[np.argmin(sure)])


class WaveletThresholdDenoiser(BaseEstimator):
    """Soft-thresholds detail coefficients of the Haar pyramid.

    Parameters
    ----------
    c : float
        Threshold multiplier for mode="fixed": lambda_j = c * sqrt(tau_j),
        where tau_j comes from the noise model (white noise gives a flat
        sigma^2 vector). Ignored in mode="sure".
    mode : {"fixed", "sure"}
        "sure" picks each subband's threshold by exact SURE minimization.
    spec : WaveletSpec
        Transform configuration (4-level Haar by default).
    """

    def __init__(self, c: float = 3.0, mode: str = "fixed",
                 spec: WaveletSpec = WaveletSpec()):
        self.c = c
        self.mode = mode
        self.spec = spec

    def denoise(self, r, noise) -> np.ndarray:
        if self.mode not in ("fixed", "sure"):
            raise ValueError(f"unknown mode {self.mode!r}")
        check_nonnegative(self.c, "c")
        r = check_grid(r, "r")
        tau = subband_variances(noise, self.spec)
        coeffs = dwt2(r, self.spec)
        is_complex = np.iscomplexobj(coeffs)
        slices = subband_slices(self.spec, *r.shape)
        for j in range(1, self.spec.subband_count):
            rs, cs = slices[j]
            block = coeffs[rs, cs]
            if self.mode == "fixed":
                lam = self.c * np.sqrt(tau[j])
            elif tau[j] == 0:
                lam = 0.0
            elif is_complex:
                lam = _sure_tuned_threshold_complex(block, tau[j])
            else:
                lam = sure_tuned_threshold(block, np.sqrt(tau[j]))
            if lam > 0:
                coeffs[rs, cs] = soft_threshold(block, lam)
        return idwt2(coeffs, self.spec)

    # Callable alias so bare-function call sites work too.
    __call__ = denoise


def denoise_white(r, sigma: float, c: float = 3.0,
                  spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Soft-threshold every detail coefficient with lambda = c * sigma."""
    check_positive(sigma, "sigma")
    from .noise import SubbandDiagonal
    tau = np.full(spec.subband_count, sigma ** 2)
    return WaveletThresholdDenoiser(c=c, spec=spec).denoise(
        r, SubbandDiagonal(tau, spec))


def denoise_subband(r, tau, c: float = 3.0,
                    spec: WaveletSpec = WaveletSpec()) -> np.ndarray:
    """Per-subband thresholds lambda_j = c * sqrt(tau_j)."""
    from .noise import SubbandDiagonal
    return WaveletThresholdDenoiser(c=c, spec=spec).denoise(
        r, SubbandDiagonal(np.asarray(tau, dtype=np.float64), spec))


def apply_denoiser(f, r, noise) -> np.ndarray:
    """Run a denoiser (object or callable) and validate its contract."""
    out = f.denoise(r, noise) if hasattr(f, "denoise") else f(r, noise)
    out = np.asarray(out)
    if out.shape != np.shape(r):
        raise ValueError(
            f"denoiser changed shape {np.shape(r)} -> {out.shape}"
        )
    return out
