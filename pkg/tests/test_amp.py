"""AMP loop: sigma_hat, Monte-Carlo Onsager divergence, state evolution."""

import csv

import numpy as np
import pytest

from sureamp import (SeededRng, WaveletThresholdDenoiser, amp_run,
                     make_gaussian_operator, onsager_divergence,
                     sample_gaussian_grid, sigma_hat, soft_threshold,
                     spike_image)

identity = lambda g, noise: g
zero_map = lambda g, noise: np.zeros_like(g)


def norm_loop_oracle(z):
    total = 0.0
    for v in z:
        total += v * v
    return np.sqrt(total)


def make_problem(rng, side=32, k=8, rate=0.4, snr_db=20.0):
    h = w = side
    m = round(rate * h * w)
    x = spike_image(rng.substream(0), h, w, k)
    op = make_gaussian_operator(rng.substream(1), m, (h, w))
    y0 = op.forward(x)
    sigma = np.sqrt(np.sum(y0 ** 2) * 10 ** (-snr_db / 10) / m)
    y = y0 + sigma * rng.substream(2).standard_normal(m)
    return op, y, x


class TestSigmaHat:
    def test_zero_vector(self):
        assert sigma_hat(np.zeros(10)) == 0.0

    def test_all_ones(self):
        assert sigma_hat(np.ones(37)) == pytest.approx(1.0, abs=1e-14)

    def test_matches_loop_oracle(self, rng):
        z = rng.standard_normal(101)
        expected = norm_loop_oracle(z) / np.sqrt(101)
        assert sigma_hat(z) == pytest.approx(expected, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            sigma_hat(np.array([]))

    def test_m_mismatch_rejected(self, rng):
        with pytest.raises(ValueError):
            sigma_hat(rng.standard_normal(10), m=11)


class TestOnsagerDivergence:
    def test_identity_yields_n(self, rng):
        r = rng.standard_normal((64, 64)) * 0.2
        div = onsager_divergence(identity, r, 0.1, K=1, rng=rng)
        assert div == pytest.approx(r.size, rel=1e-6)

    def test_zero_map_yields_zero(self, rng):
        r = rng.standard_normal((16, 16))
        assert onsager_divergence(zero_map, r, 0.1, K=2, rng=rng) == 0.0

    def test_soft_threshold_matches_survivor_count(self, rng):
        lam = 0.9
        den = lambda g, noise: soft_threshold(g, lam)
        r = rng.standard_normal((64, 64))
        div = onsager_divergence(den, r, 1.0, K=10, rng=rng.substream(1))
        assert div == pytest.approx(np.sum(np.abs(r) > lam), rel=0.05)

    def test_all_zero_input_uses_floor_eps(self, rng):
        # eps falls back to 1e-6 instead of dividing by zero
        div = onsager_divergence(identity, np.zeros((8, 8)), 0.1, K=1, rng=rng)
        assert div == pytest.approx(64, rel=1e-6)


class TestAmpRun:
    def test_zero_measurements_zero_denoiser_fixed_point(self, rng):
        op = make_gaussian_operator(rng, 20, (8, 8))
        result = amp_run(op, np.zeros(20), zero_map, T=4, rng=rng,
                         stop_rel_tol=None)
        assert not result.x.any()
        assert result.sigma_hat == 0.0

    def test_one_iteration_identity_is_adjoint(self, rng):
        op, y, _ = make_problem(rng, side=16, k=4)
        result = amp_run(op, y, identity, T=1, rng=rng)
        assert np.array_equal(result.x, op.adjoint(y))

    def test_sparse_recovery_and_state_evolution(self, rng):
        op, y, x = make_problem(SeededRng(77), side=32, k=8)
        den = WaveletThresholdDenoiser(c=1.5)
        result = amp_run(op, y, den, T=10, rng=rng, x_true=x,
                         stop_rel_tol=None)
        assert result.report.column("mse")[-1] < 0.1 * np.sum(x ** 2) / x.size
        ratios = result.report.column("std_ratio")[3:]
        assert all(0.9 <= v <= 1.1 for v in ratios)

    def test_disabling_onsager_decalibrates(self, rng):
        op, y, x = make_problem(SeededRng(78), side=32, k=8)
        den = WaveletThresholdDenoiser(c=1.5)
        on = amp_run(op, y, den, T=8, rng=rng, x_true=x, stop_rel_tol=None)
        off = amp_run(op, y, den, T=8, rng=rng, x_true=x, onsager=False,
                      stop_rel_tol=None)
        dev_on = np.mean(np.abs(np.array(on.report.column("std_ratio")[3:]) - 1))
        dev_off = np.mean(np.abs(np.array(off.report.column("std_ratio")[3:]) - 1))
        assert dev_on < dev_off

    def test_bit_reproducible(self):
        op, y, x = make_problem(SeededRng(79), side=16, k=4)
        den = WaveletThresholdDenoiser(c=1.5)
        a = amp_run(op, y, den, T=5, rng=SeededRng(5, 5), stop_rel_tol=None)
        b = amp_run(op, y, den, T=5, rng=SeededRng(5, 5), stop_rel_tol=None)
        assert np.array_equal(a.x, b.x)
        assert np.array_equal(a.r, b.r)
        assert a.sigma_hat == b.sigma_hat

    def test_early_stop_flag(self, rng):
        op, y, _ = make_problem(SeededRng(80), side=16, k=4)
        den = WaveletThresholdDenoiser(c=1.5)
        stopped = amp_run(op, y, den, T=10, rng=rng, stop_rel_tol=1.0)
        assert len(stopped.report.rows) == 1
        full = amp_run(op, y, den, T=10, rng=rng, stop_rel_tol=None)
        assert len(full.report.rows) == 10

    def test_result_consistency(self, rng):
        # returned x is exactly the denoiser applied at the returned (r,
        # sigma), and sigma is exactly ||z||/sqrt(m) for the returned z
        from sureamp import White
        op, y, _ = make_problem(SeededRng(81), side=16, k=4)
        den = WaveletThresholdDenoiser(c=1.5)
        result = amp_run(op, y, den, T=6, rng=rng)
        redo = den.denoise(result.r, White(result.sigma_hat))
        assert np.array_equal(result.x, redo)
        assert result.sigma_hat == sigma_hat(result.z)
        assert result.iterations == len(result.report.rows)

    def test_nan_state_aborts(self, rng):
        op, y, _ = make_problem(SeededRng(82), side=16, k=4)
        bad = lambda g, noise: np.full_like(g, np.nan)
        with pytest.raises(RuntimeError):
            amp_run(op, y, bad, T=3, rng=rng)

    def test_report_csv_round_trip(self, rng, tmp_path):
        op, y, x = make_problem(SeededRng(83), side=16, k=4)
        den = WaveletThresholdDenoiser(c=1.5)
        result = amp_run(op, y, den, T=4, rng=rng, x_true=x,
                         stop_rel_tol=None)
        path = tmp_path / "report.csv"
        result.report.to_csv(path)
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 4
        assert float(rows[-1]["sigma_hat"]) == result.sigma_hat
        assert set(rows[0]) == set(result.report.COLUMNS)
