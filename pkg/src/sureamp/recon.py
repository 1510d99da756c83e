"""Estimator-style front ends for the reconstruction loops.

Both classes follow the scikit-learn contract: constructor arguments are
stored verbatim, fit(y) runs the reconstruction and exposes trailing-
underscore attributes, get_params/set_params come from BaseEstimator.
"""

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.exceptions import NotFittedError

from .amp import amp_run
from .colored import vd_recon_approx
from .rng import SeededRng

__all__ = ["AmpReconstructor", "VdFourierReconstructor"]


class AmpReconstructor(BaseEstimator):
    """AMP reconstruction from a dense Gaussian operator.

    Parameters
    ----------
    operator : GaussianOperator
    denoiser : object with denoise(grid, noise)
    iters : int, max iterations
    probes : int, Monte-Carlo samples per Onsager divergence
    seed : int, probe stream seed
    onsager : bool, disable only to demonstrate the calibration breaking
    stop_rel_tol : float or None, early-stop threshold on sigma_hat

    Attributes (after fit)
    ----------
    image_ : reconstructed grid
    r_ : final denoiser input
    sigma_hat_ : effective-noise std at r_
    report_ : per-iteration AmpReport
    """

    def __init__(self, operator=None, denoiser=None, iters=30, probes=1,
                 seed=0, onsager=True, stop_rel_tol=1e-3):
        self.operator = operator
        self.denoiser = denoiser
        self.iters = iters
        self.probes = probes
        self.seed = seed
        self.onsager = onsager
        self.stop_rel_tol = stop_rel_tol

    def fit(self, y, x_true=None):
        if self.operator is None or self.denoiser is None:
            raise ValueError("operator and denoiser must be set")
        result = amp_run(self.operator, np.asarray(y), self.denoiser,
                         T=self.iters, rng=SeededRng(self.seed, 1),
                         x_true=x_true, K=self.probes, onsager=self.onsager,
                         stop_rel_tol=self.stop_rel_tol)
        self.image_ = result.x
        self.r_ = result.r
        self.sigma_hat_ = result.sigma_hat
        self.report_ = result.report
        return self

    def predict(self, y=None):
        if y is not None:
            self.fit(y)
        if not hasattr(self, "image_"):
            raise NotFittedError("call fit(y) first")
        return self.image_


class VdFourierReconstructor(BaseEstimator):
    """Approximate density-compensated recon from variable-density Fourier data.

    Attributes (after fit): image_, r_, tau_, iterations_, history_.
    """

    def __init__(self, operator=None, denoiser=None, iters=10, seed=0,
                 stop_on_tau_increase=True):
        self.operator = operator
        self.denoiser = denoiser
        self.iters = iters
        self.seed = seed
        self.stop_on_tau_increase = stop_on_tau_increase

    def fit(self, y, x_true=None):
        if self.operator is None or self.denoiser is None:
            raise ValueError("operator and denoiser must be set")
        result = vd_recon_approx(self.operator, np.asarray(y), self.denoiser,
                                 T=self.iters, rng=SeededRng(self.seed, 2),
                                 x_true=x_true,
                                 stop_on_tau_increase=self.stop_on_tau_increase)
        self.image_ = result.x
        self.r_ = result.r
        self.tau_ = result.tau
        self.iterations_ = result.iterations
        self.history_ = result.history
        return self

    def predict(self, y=None):
        if y is not None:
            self.fit(y)
        if not hasattr(self, "image_"):
            raise NotFittedError("call fit(y) first")
        return self.image_
