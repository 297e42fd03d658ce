import numpy as np
import pytest
import scipy.signal

from resonance.processes import (
    Ar2, CovariateProcess, Sinusoid, SquareWave, Switching, ar2_coeffs, psd,
)
from resonance.rng import Rng


# --- sinusoid -----------------------------------------------------------------

def test_sinusoid_values():
    s = Sinusoid(0.5, 0.01)
    assert s.mean_at(0)[0] == 0.0
    assert np.isclose(s.mean_at(25)[0], 0.5 * np.sin(2 * np.pi * 0.25))
    assert s.period_steps() == 100.0


def test_sinusoid_zero_freq_is_zero_mean():
    s = Sinusoid(0.5, 0.0)
    assert all(s.mean_at(k)[0] == 0.0 for k in range(100))


def test_sinusoid_continuous_anchoring():
    s = Sinusoid(0.5, 0.01)
    eta = 0.01
    assert s.mean_continuous(0.0, eta)[0] == s.mean_at(0)[0]
    sq = np.sqrt(eta)
    for k in [1, 7, 100, 9999]:
        assert s.mean_continuous(sq * k, eta)[0] == s.mean_at(k)[0]


def test_sinusoid_continuous_period_algebra():
    # f=0.01, eta=0.01: continuous period sqrt(eta)/f = 10 time units
    s = Sinusoid(0.5, 0.01)
    t = 3.21
    assert np.isclose(s.mean_continuous(t, 0.01)[0],
                      s.mean_continuous(t + 10.0, 0.01)[0], atol=1e-12)


# --- square wave ----------------------------------------------------------------

def test_square_wave_pattern():
    e1 = np.array([1.0, 0.0])
    s = SquareWave(4, e1)
    got = [s.mean_at(k)[0] for k in range(8)]
    assert got == [0.5, 0.5, -0.5, -0.5, 0.5, 0.5, -0.5, -0.5]


def test_square_wave_zero_period():
    s = SquareWave(0, np.array([1.0]))
    assert all(s.mean_at(k)[0] == 0.0 for k in range(10))


def test_square_wave_zero_average_even_periods():
    for T in (2, 4, 10, 16):
        s = SquareWave(T, np.array([1.0]))
        for start_mult in (0, 1, 3):
            window = [s.mean_at(start_mult * T + k)[0] for k in range(2 * T)]
            assert sum(window) == 0.0


def test_square_wave_continuous_anchoring():
    s = SquareWave(7, np.array([1.0]))
    sq = np.sqrt(0.01)
    for k in range(40):
        assert s.mean_continuous(sq * k, 0.01)[0] == s.mean_at(k)[0]


# --- AR(2) ---------------------------------------------------------------------

def test_ar2_coeffs_closed_form():
    # direct evaluation at phi2 = -0.5, f = 0.03
    phi1 = 4.0 * (-0.5) / (-1.5) * np.cos(0.06 * np.pi)
    assert np.isclose(phi1, 1.30972, atol=1e-5)


def test_ar2_coeffs_satisfy_constraints():
    p1, p2 = ar2_coeffs(0.03, 0.1, 1e-5)
    assert np.isclose(p1, 4.0 * p2 / (p2 - 1.0) * np.cos(2 * np.pi * 0.03))
    var = 1e-5 * (1 - p2) / ((1 + p2) * ((1 - p2) ** 2 - p1 ** 2))
    assert abs(var - 0.1) < 1e-10
    assert abs(p2) < 1.0 and p2 - p1 < 1.0 and p1 + p2 < 1.0


def test_ar2_coeffs_rejects_bad_inputs():
    with pytest.raises(ValueError):
        ar2_coeffs(0.0, 0.1, 1e-5)
    with pytest.raises(ValueError):
        ar2_coeffs(0.3, 0.1, 1e-5)
    with pytest.raises(ValueError):
        ar2_coeffs(0.03, 1e-6, 1e-5)


def test_ar2_long_run_variance():
    signal = Ar2(0.03, 0.1, 1e-5)
    rng = Rng(2)
    n = 1_000_000
    total = 0.0
    total2 = 0.0
    for k in range(n):
        v = signal.mean_at(k, rng)[0]
        total += v
        total2 += v * v
    var = total2 / n - (total / n) ** 2
    assert abs(var - 0.1) < 0.005


def test_ar2_stream_order_enforced():
    signal = Ar2(0.03, 0.1, 1e-5)
    rng = Rng(0)
    signal.mean_at(10, rng)
    assert signal.mean_at(10, rng)[0] == signal.mean_at(10, rng)[0]
    with pytest.raises(ValueError):
        signal.mean_at(3, rng)


def test_ar2_determinism_and_reset():
    a = Ar2(0.02, 0.1, 1e-5)
    r1 = Rng(5)
    seq1 = [a.mean_at(k, r1)[0] for k in range(200)]
    a.reset()
    r2 = Rng(5)
    seq2 = [a.mean_at(k, r2)[0] for k in range(200)]
    assert seq1 == seq2


def test_ar2_zero_freq_degenerates():
    a = Ar2(0.0, 0.1, 1e-5)
    assert all(a.mean_at(k, None)[0] == 0.0 for k in range(50))


# --- switching -------------------------------------------------------------------

def test_switching_holds_within_interval():
    s = Switching(10, 0.25, 5)
    rng = Rng(9)
    m3 = s.mean_at(3, rng).copy()
    m9 = s.mean_at(9, rng).copy()
    m10 = s.mean_at(10, rng).copy()
    assert np.array_equal(m3, m9)
    assert not np.array_equal(m9, m10)


def test_switching_interval_means_iid():
    v, d = 0.25, 3
    s = Switching(7, v, d)
    rng = Rng(13)
    means = np.array([s.mean_at(i * 7, rng) for i in range(10_000)])
    cov = np.cov(means.T)
    assert np.max(np.abs(cov - v * np.eye(d))) < 0.05 * v


def test_switching_stream_order_enforced():
    s = Switching(5, 0.1, 2)
    rng = Rng(1)
    s.mean_at(12, rng)
    with pytest.raises(ValueError):
        s.mean_at(11, rng)


def test_switching_zero_interval_iid_per_sample():
    s = Switching(0, 0.4, 2)
    assert s.iid_per_sample
    rng = Rng(3)
    a = s.mean_at(0, rng).copy()
    b = s.mean_at(1, rng).copy()
    assert not np.array_equal(a, b)


# --- covariate process -------------------------------------------------------------

def test_sample_degenerate_covariance():
    proc = CovariateProcess(Sinusoid(0.5, 0.02), 0.0, append_bias=False)
    rng = Rng(4)
    x = proc.sample(13, 7, rng)
    assert np.all(x == proc.mean_at(13))


def test_sample_moments_iid():
    proc = CovariateProcess(Sinusoid(0.5, 0.0), 1.0, append_bias=False)
    rng = Rng(21)
    x = proc.sample(0, 100_000, rng)
    assert abs(x.mean()) < 4.0 / np.sqrt(100_000)
    assert abs(x.var() - 1.0) < 0.05


def test_sample_bias_column():
    proc = CovariateProcess(Sinusoid(0.5, 0.01), 1.0, append_bias=True)
    x = proc.sample(5, 10, Rng(2))
    assert np.all(x[:, -1] == 1.0)
    assert proc.sample_dim == 2


def test_sample_switching_stationary_variance():
    proc = CovariateProcess(Switching(0, 0.4, 2), 0.1, append_bias=False)
    x = proc.sample(0, 200_000, Rng(6))
    assert abs(x.var() - 0.5) < 0.01
    assert proc.stationary_var() == 0.5


def test_sample_rejects_empty():
    proc = CovariateProcess(Sinusoid(0.5, 0.01), 1.0)
    with pytest.raises(ValueError):
        proc.sample(0, 0, Rng(0))


def test_identical_seeds_identical_samples():
    def draw():
        proc = CovariateProcess(Switching(4, 0.3, 3), 0.25, append_bias=True)
        rng = Rng(77)
        return np.concatenate([proc.sample(k, 5, rng).ravel() for k in range(50)])

    assert np.array_equal(draw(), draw())


# --- PSD ----------------------------------------------------------------------------

def test_psd_matches_scipy_welch():
    x = Rng(10).normals(8192) + np.sin(2 * np.pi * 0.1 * np.arange(8192))
    freqs, power = psd(x, 1024, 0.5)
    f_ref, p_ref = scipy.signal.welch(
        x, window="hann", nperseg=1024, noverlap=512, detrend=False,
        scaling="density", fs=1.0,
    )
    assert np.allclose(freqs, f_ref)
    assert np.allclose(power, p_ref, rtol=1e-10)


def test_psd_sinusoid_peak():
    k = np.arange(2 ** 14)
    x = np.sin(2 * np.pi * 0.03 * k)
    freqs, power = psd(x, 1024, 0.5)
    assert abs(freqs[np.argmax(power)] - 0.03) <= 1.0 / 1024.0


def test_psd_white_noise_flat():
    ratios = []
    for seed in range(20):
        x = Rng(seed).normals(4096)
        _, power = psd(x, 256, 0.5)
        ratios.append(power.max() / np.median(power))
    assert np.mean(ratios) < 10.0


def test_psd_ar2_peak_location():
    signal = Ar2(0.03, 0.1, 1e-5)
    rng = Rng(2)
    x = np.array([signal.mean_at(k, rng)[0] for k in range(2 ** 15)])
    freqs, power = psd(x, 4096, 0.5)
    assert abs(freqs[np.argmax(power)] - 0.03) < 0.005


def test_psd_rejects_short_series():
    with pytest.raises(ValueError):
        psd(np.zeros(100), 256)
    with pytest.raises(ValueError):
        psd(np.zeros(100), 8)
