"""SURE/GSURE risk estimation: global values and patch-averaged heatmaps.

The white-noise estimate for a denoiser f at noisy input r is

    S = (1/n) ||r - f(r)||^2 - sigma^2 + (2 sigma^2 / n) * div(f),

with the divergence estimated by Monte-Carlo probes. The colored
(wavelet-diagonal covariance) generalization replaces sigma^2 by the mean
per-coefficient variance and the divergence by its covariance-weighted
counterpart; with a uniform variance vector it reduces exactly to the
white path (shared probe streams give bit-identical heatmaps).

Heatmaps average the patch-level estimate over every patch covering a
pixel. Patches sit on a stride lattice plus edge-snapped positions so all
pixels are covered. Values can be negative: the estimate is unbiased, not
a norm, so no clamping is applied (export a clamped copy separately if
needed for display).
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .denoisers import apply_denoiser
from .noise import SubbandDiagonal, White, subband_variances
from .rng import SeededRng
from .validation import check_grid, check_positive, check_same_shape
from .wavelets import WaveletSpec, dwt2, idwt2, subband_sizes, subband_slices

__all__ = [
    "SureConfig",
    "DivergenceField",
    "Heatmap",
    "probe_eps",
    "divergence_field",
    "sure_global",
    "sure_heatmap",
    "gsure_global",
    "gsure_heatmap",
    "mse_heatmap",
    "heatmap_discrepancy",
    "write_heatmap_csv",
]


@dataclass(frozen=True)
class SureConfig:
    """Patch-averaging and Monte-Carlo settings for heatmap generation."""

    patch: int = 48
    stride: int | None = None   # defaults to patch // 4
    K: int = 2
    eps_floor: float = 1e-6

    def resolved_stride(self) -> int:
        return max(1, self.patch // 4) if self.stride is None else self.stride

    def validate(self, h: int, w: int):
        if self.patch < 1 or self.patch > min(h, w):
            raise ValueError(
                f"patch {self.patch} must lie in [1, {min(h, w)}] for a {h}x{w} grid"
            )
        s = self.resolved_stride()
        if s < 1 or s > self.patch:
            raise ValueError(f"stride {s} must lie in [1, patch={self.patch}]")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.eps_floor <= 0:
            raise ValueError("eps_floor must be positive")


@dataclass
class DivergenceField:
    """Per-pixel Monte-Carlo divergence contributions.

    values sums to the global divergence estimate. For colored noise the
    probes are covariance-shaped with the largest subband variance factored
    out; `scale` is that factor, and (2*scale/n)*sum(values) is the risk
    correction. White noise has scale == sigma^2.
    """

    values: np.ndarray
    scale: float
    eps: float
    K: int

    def total(self) -> float:
        return float(np.sum(self.values))


@dataclass
class Heatmap:
    """Per-pixel risk estimates plus how many patches informed each pixel."""

    values: np.ndarray
    coverage: np.ndarray
    config: SureConfig
    kind: str = "sure"


def probe_eps(r, floor: float = 1e-6) -> float:
    """Perturbation size max(|r|)/1000 (per real/imag part), floored."""
    r = np.asarray(r)
    if np.iscomplexobj(r):
        peak = max(np.max(np.abs(r.real)), np.max(np.abs(r.imag)))
    else:
        peak = np.max(np.abs(r))
    return float(max(peak / 1000.0, floor))


def _draw_probe(rng: SeededRng, shape) -> np.ndarray:
    """Gaussian probe rescaled to ||b||^2 = n.

    E[b b^T] = I exactly (spherical symmetry), so trace estimates stay
    unbiased, and linear denoisers get exact divergences: the identity map
    yields n with no Monte-Carlo fluctuation.
    """
    g = rng.standard_normal(shape)
    n = g.size
    return g * np.sqrt(n / np.sum(g * g))


def _covariance_direction(b, tau_norm, spec):
    """Apply Psi^T diag(tau_norm) Psi; exact identity when tau_norm == 1."""
    if np.all(tau_norm == 1.0):
        return b
    coeffs = dwt2(b, spec)
    for j, (rs, cs) in enumerate(subband_slices(spec, *b.shape)):
        coeffs[rs, cs] *= tau_norm[j]
    return idwt2(coeffs, spec)


def divergence_field(f, r, noise, K: int = 1, eps: float | None = None,
                     rng: SeededRng = SeededRng(0),
                     spec: WaveletSpec = WaveletSpec()) -> DivergenceField:
    """Monte-Carlo per-pixel divergence of a denoiser at r.

    White noise perturbs along the raw probes; colored noise shapes them by
    the covariance (normalized by its largest subband variance, which is
    reported as `scale`). Complex inputs get independent probes for the
    real- and imaginary-part divergences; the field stores their average so
    the identity denoiser totals n for real and complex inputs alike.
    """
    if K < 1:
        raise ValueError(f"K must be >= 1, got {K}")
    r = check_grid(r, "r")
    tau = subband_variances(noise, spec)
    scale = float(np.max(tau))
    if scale > 0:
        tau_norm = tau / scale
    else:
        # degenerate White(0): probes stay unshaped; scale only matters for
        # the colored risk formula, which cannot reach this branch
        tau_norm = np.ones_like(tau)
    if eps is None:
        eps = probe_eps(r)
    check_positive(eps, "eps")
    base = apply_denoiser(f, r, noise)
    acc = np.zeros(r.shape, dtype=np.float64)
    is_complex = np.iscomplexobj(r)
    for k in range(K):
        if is_complex:
            b_re = _draw_probe(rng.substream(2 * k), r.shape)
            b_im = _draw_probe(rng.substream(2 * k + 1), r.shape)
            p_re = _covariance_direction(b_re, tau_norm, spec)
            p_im = _covariance_direction(b_im, tau_norm, spec)
            d_re = b_re * (apply_denoiser(f, r + eps * p_re, noise) - base).real
            d_im = b_im * (apply_denoiser(f, r + 1j * eps * p_im, noise) - base).imag
            acc += 0.5 * (d_re + d_im) / eps
        else:
            b = _draw_probe(rng.substream(k), r.shape)
            p = _covariance_direction(b, tau_norm, spec)
            acc += b * (apply_denoiser(f, r + eps * p, noise) - base) / eps
    return DivergenceField(values=acc / K, scale=scale, eps=eps, K=K)


def _squared_error(a, b):
    diff = a - b
    return np.abs(diff) ** 2 if np.iscomplexobj(diff) else diff ** 2


def _patch_starts(size, patch, stride):
    starts = list(range(0, size - patch + 1, stride))
    if starts[-1] != size - patch:
        starts.append(size - patch)
    return starts


def _patch_average(sqerr, dvalues, noise_level, div_scale, cfg, kind):
    """Shared accumulation for risk and MSE heatmaps.

    Per patch p: S_p = mean(sqerr_p) - noise_level + (2*div_scale/|p|) *
    sum(d_p); pixels average S_p over the patches containing them.
    """
    h, w = sqerr.shape
    cfg.validate(h, w)
    p = cfg.patch
    stride = cfg.resolved_stride()
    area = float(p * p)
    total = np.zeros((h, w))
    coverage = np.zeros((h, w), dtype=np.int64)
    for r0 in _patch_starts(h, p, stride):
        for c0 in _patch_starts(w, p, stride):
            sl = (slice(r0, r0 + p), slice(c0, c0 + p))
            value = np.sum(sqerr[sl]) / area - noise_level
            if dvalues is not None:
                value += (2.0 * div_scale / area) * np.sum(dvalues[sl])
            total[sl] += value
            coverage[sl] += 1
    return Heatmap(values=total / coverage, coverage=coverage, config=cfg,
                   kind=kind)


def sure_global(r, xhat, divfield: DivergenceField, sigma: float) -> float:
    """Unbiased MSE estimate for white noise of std sigma."""
    r = check_grid(r, "r")
    xhat = check_grid(xhat, "xhat")
    check_same_shape(r, xhat, "r", "xhat")
    check_positive(sigma, "sigma")
    n = r.size
    fid = float(np.sum(_squared_error(r, xhat))) / n
    return fid - sigma ** 2 + (2.0 * sigma ** 2 / n) * divfield.total()


def sure_heatmap(r, xhat, divfield: DivergenceField, sigma: float,
                 cfg: SureConfig = SureConfig()) -> Heatmap:
    """Patch-averaged white-noise risk heatmap."""
    r = check_grid(r, "r")
    xhat = check_grid(xhat, "xhat")
    check_same_shape(r, xhat, "r", "xhat")
    check_positive(sigma, "sigma")
    sqerr = _squared_error(r, xhat)
    return _patch_average(sqerr, divfield.values, sigma ** 2, sigma ** 2,
                          cfg, "sure")


def _check_tau_positive(tau, spec):
    tau = np.asarray(tau, dtype=np.float64)
    if tau.shape != (spec.subband_count,):
        raise ValueError(f"tau must have length {spec.subband_count}")
    zero = np.nonzero(tau <= 0)[0]
    if zero.size:
        raise ValueError(
            f"tau must be positive in every subband; subband {zero[0]} is "
            f"{tau[zero[0]]}"
        )
    return tau


def _mean_coefficient_variance(tau, spec, h, w):
    # Pixel-domain diagonal of Psi^T diag(tau) Psi; spatially constant for
    # the orthonormal Haar pyramid, and equal to the mean per-coefficient
    # variance sum_j n_j tau_j / n.
    if np.all(tau == tau[0]):
        return float(tau[0])
    sizes = subband_sizes(spec, h, w)
    return float(np.dot(sizes, tau) / (h * w))


def gsure_global(r, xhat, f, tau, rng: SeededRng,
                 spec: WaveletSpec = WaveletSpec(),
                 cfg: SureConfig = SureConfig()) -> float:
    """Unbiased MSE estimate for wavelet-diagonal colored noise."""
    r = check_grid(r, "r")
    xhat = check_grid(xhat, "xhat")
    check_same_shape(r, xhat, "r", "xhat")
    tau = _check_tau_positive(tau, spec)
    h, w = r.shape
    n = r.size
    dfield = divergence_field(f, r, SubbandDiagonal(tau, spec), K=cfg.K,
                              eps=probe_eps(r, cfg.eps_floor), rng=rng,
                              spec=spec)
    fid = float(np.sum(_squared_error(r, xhat))) / n
    nu = _mean_coefficient_variance(tau, spec, h, w)
    return fid - nu + (2.0 * dfield.scale / n) * dfield.total()


def gsure_heatmap(r, xhat, f, tau, rng: SeededRng,
                  spec: WaveletSpec = WaveletSpec(),
                  cfg: SureConfig = SureConfig()) -> Heatmap:
    """Patch-averaged colored-noise risk heatmap."""
    r = check_grid(r, "r")
    xhat = check_grid(xhat, "xhat")
    check_same_shape(r, xhat, "r", "xhat")
    tau = _check_tau_positive(tau, spec)
    h, w = r.shape
    dfield = divergence_field(f, r, SubbandDiagonal(tau, spec), K=cfg.K,
                              eps=probe_eps(r, cfg.eps_floor), rng=rng,
                              spec=spec)
    sqerr = _squared_error(r, xhat)
    nu = _mean_coefficient_variance(tau, spec, h, w)
    return _patch_average(sqerr, dfield.values, nu, dfield.scale, cfg, "gsure")


def mse_heatmap(xhat, x_true, cfg: SureConfig = SureConfig()) -> Heatmap:
    """Patch-averaged true MSE (requires ground truth); same lattice."""
    xhat = check_grid(xhat, "xhat")
    x_true = check_grid(x_true, "x_true")
    check_same_shape(xhat, x_true, "xhat", "x_true")
    sqerr = _squared_error(xhat, x_true)
    return _patch_average(sqerr, None, 0.0, 0.0, cfg, "mse")


def heatmap_discrepancy(sure_hm: Heatmap, mse_hm: Heatmap,
                        metric: str = "normalized-abs",
                        floor: float = 1e-12) -> float:
    """Mean per-pixel disagreement between a risk heatmap and the true MSE.

    Default is mean |mse - sure| / max(mse, floor); metric="squared" gives
    the unnormalized mean (mse - sure)^2.
    """
    if sure_hm.values.shape != mse_hm.values.shape:
        raise ValueError("heatmaps have different shapes")
    a, b = sure_hm.config, mse_hm.config
    if a.patch != b.patch or a.resolved_stride() != b.resolved_stride():
        raise ValueError(
            f"heatmap configs differ: patch/stride {a.patch}/{a.resolved_stride()}"
            f" vs {b.patch}/{b.resolved_stride()}"
        )
    diff = mse_hm.values - sure_hm.values
    if metric == "squared":
        return float(np.mean(diff ** 2))
    if metric == "normalized-abs":
        return float(np.mean(np.abs(diff) / np.maximum(mse_hm.values, floor)))
    raise ValueError(f"unknown metric {metric!r}")


def write_heatmap_csv(path, hm: Heatmap):
    """One row per pixel: x (column), y (row), value, coverage."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "y", "value", "coverage"])
        h, w = hm.values.shape
        for y in range(h):
            for x in range(w):
                writer.writerow([x, y, repr(hm.values[y, x]), hm.coverage[y, x]])
