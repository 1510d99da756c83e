"""Compressive-sensing reconstruction with per-pixel risk heatmaps.

AMP-based recovery from Gaussian or variable-density Fourier measurements,
pluggable denoisers, and SURE/GSURE estimates of the reconstruction error
that need no ground truth.
"""

__version__ = "0.1.0"

from .amp import AmpReport, AmpResult, amp_run, onsager_divergence, sigma_hat
from .colored import (ColoredProblem, VdResult, estimate_subband_tau,
                      gen_colored_problem, vd_recon_approx)
from .denoisers import (WaveletThresholdDenoiser, apply_denoiser,
                        denoise_subband, denoise_white, soft_threshold,
                        sure_tuned_threshold)
from .grids import sample_gaussian_grid
from .io import load_pgm, read_grid, save_pgm, write_grid
from .metrics import mse, psnr
from .noise import SubbandDiagonal, White, subband_variances
from .operators import (FourierMaskOperator, GaussianOperator,
                        full_mask_operator, make_gaussian_operator,
                        make_vd_mask)
from .phantoms import blocks_phantom, complex_phantom, spike_image
from .plugin_client import PluginDenoiser, PluginError
from .recon import AmpReconstructor, VdFourierReconstructor
from .rng import SeededRng
from .uncertainty import (DivergenceField, Heatmap, SureConfig,
                          divergence_field, gsure_global, gsure_heatmap,
                          heatmap_discrepancy, mse_heatmap, probe_eps,
                          sure_global, sure_heatmap, write_heatmap_csv)
from .wavelets import WaveletSpec, dwt2, idwt2, subband_map, subband_sizes

__all__ = [
    "AmpReconstructor", "AmpReport", "AmpResult", "ColoredProblem",
    "DivergenceField", "FourierMaskOperator", "GaussianOperator", "Heatmap",
    "PluginDenoiser", "PluginError", "SeededRng", "SubbandDiagonal",
    "SureConfig", "VdFourierReconstructor", "VdResult",
    "WaveletSpec", "WaveletThresholdDenoiser", "White",
    "amp_run", "apply_denoiser", "blocks_phantom", "complex_phantom",
    "denoise_subband", "denoise_white", "divergence_field",
    "estimate_subband_tau", "full_mask_operator", "gen_colored_problem",
    "gsure_global", "gsure_heatmap", "heatmap_discrepancy", "idwt2",
    "load_pgm", "make_gaussian_operator", "make_vd_mask", "mse",
    "mse_heatmap", "onsager_divergence", "probe_eps", "psnr", "read_grid",
    "sample_gaussian_grid", "save_pgm", "sigma_hat", "soft_threshold",
    "spike_image", "subband_map", "subband_sizes", "subband_variances",
    "sure_global", "sure_heatmap", "sure_tuned_threshold",
    "vd_recon_approx", "write_grid", "write_heatmap_csv", "dwt2",
]
