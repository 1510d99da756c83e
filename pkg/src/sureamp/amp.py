"""AMP iteration with a pluggable denoiser and Onsager correction.

The loop is

    x_0 = 0, z_0 = y
    r_t       = x_t + A^T z_t
    sigma_t   = ||z_t||_2 / sqrt(m)
    x_{t+1}   = f(r_t; sigma_t)
    z_{t+1}   = y - A x_{t+1} + (1/m) * div * z_t

with div the Monte-Carlo divergence of f at r_t. The correction keeps the
effective noise r_t - x close to white Gaussian with std sigma_t, which is
what makes the downstream SURE estimates valid; the `onsager` switch exists
so tests can demonstrate the calibration breaks without it.
"""

import csv
from dataclasses import dataclass, field

import numpy as np

from .denoisers import apply_denoiser
from .metrics import mse, psnr
from .noise import White
from .rng import SeededRng
from .uncertainty import divergence_field, probe_eps

__all__ = ["sigma_hat", "onsager_divergence", "amp_run", "AmpReport", "AmpResult"]


def sigma_hat(z, m: int | None = None) -> float:
    """Effective-noise std estimate ||z||_2 / sqrt(m)."""
    z = np.asarray(z)
    if z.size == 0:
        raise ValueError("z is empty")
    if m is None:
        m = z.size
    elif m != z.size:
        raise ValueError(f"m = {m} does not match len(z) = {z.size}")
    return float(np.linalg.norm(z.ravel()) / np.sqrt(m))


def onsager_divergence(f, r, sigma: float, K: int = 1,
                       rng: SeededRng = SeededRng(0)) -> float:
    """Monte-Carlo divergence of f at r under a white-noise model."""
    dfield = divergence_field(f, r, White(sigma), K=K, eps=probe_eps(r), rng=rng)
    return dfield.total()


def _excess_kurtosis(e):
    e = e.ravel()
    centered = e - e.mean()
    m2 = np.mean(centered ** 2)
    if m2 == 0:
        return 0.0
    return float(np.mean(centered ** 4) / m2 ** 2 - 3.0)


@dataclass
class AmpReport:
    """Per-iteration diagnostics; mse/psnr/std_ratio need ground truth."""

    rows: list = field(default_factory=list)

    COLUMNS = ("iteration", "sigma_hat", "mse", "psnr", "std_ratio", "kurtosis")

    def add(self, iteration, sig, err, snr, std_ratio, kurt):
        self.rows.append({
            "iteration": iteration, "sigma_hat": sig, "mse": err,
            "psnr": snr, "std_ratio": std_ratio, "kurtosis": kurt,
        })

    def column(self, name):
        return [row[name] for row in self.rows]

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=self.COLUMNS)
            writer.writeheader()
            for row in self.rows:
                writer.writerow({k: repr(v) if isinstance(v, float) else v
                                 for k, v in row.items()})


@dataclass
class AmpResult:
    x: np.ndarray           # final estimate f(r; sigma_hat)
    r: np.ndarray           # denoiser input that produced x
    sigma_hat: float        # effective-noise std at r (= ||z||_2/sqrt(m))
    z: np.ndarray           # measurement-domain residual that produced r
    iterations: int         # completed iterations
    report: AmpReport


def amp_run(op, y, f, T: int, rng: SeededRng = SeededRng(0),
            x_true=None, K: int = 1, onsager: bool = True,
            stop_rel_tol: float | None = 1e-3) -> AmpResult:
    """Run T AMP iterations; returns the last (x, r, sigma_hat) for SURE.

    Divergence probes draw from rng.substream(t) so trajectories are
    bit-reproducible. Iteration stops early once sigma_hat improves by less
    than stop_rel_tol relative (pass None to always run all T).
    """
    if T < 1:
        raise ValueError(f"T must be >= 1, got {T}")
    y = np.asarray(y, dtype=np.float64)
    x = np.zeros(op.shape)
    z = y.copy()
    m = y.size
    report = AmpReport()
    result = None
    sigma_prev = None
    for t in range(T):
        z_in = z
        r = x + op.adjoint(z)
        sig = sigma_hat(z, m)
        if not np.all(np.isfinite(r)):
            raise RuntimeError(f"AMP diverged: non-finite r at iteration {t}")
        if (sigma_prev is not None and stop_rel_tol is not None
                and sigma_prev - sig < stop_rel_tol * sigma_prev):
            break
        x = apply_denoiser(f, r, White(sig))
        if onsager:
            div = onsager_divergence(f, r, sig, K=K, rng=rng.substream(t))
            if not np.isfinite(div):
                raise RuntimeError(
                    f"divergence estimate is not finite at iteration {t}"
                )
            z = y - op.forward(x) + (div / m) * z
        else:
            z = y - op.forward(x)
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(z))):
            raise RuntimeError(f"AMP diverged: non-finite state at iteration {t}")
        if x_true is not None:
            eff = r - x_true
            ratio = float(np.std(eff) / sig) if sig > 0 else float("nan")
            report.add(t, sig, mse(x, x_true), psnr(x, x_true),
                       ratio, _excess_kurtosis(eff))
        else:
            report.add(t, sig, float("nan"), float("nan"),
                       float("nan"), float("nan"))
        result = AmpResult(x=x, r=r, sigma_hat=sig, z=z_in, iterations=t + 1,
                           report=report)
        sigma_prev = sig
    return result
