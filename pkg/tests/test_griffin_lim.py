import numpy as np

from byakta.dsp import StftConfig, griffin_lim, istft, spectral_convergence, stft

CFG = StftConfig()
N = 22050


def tone_mag():
    x = np.sin(2 * np.pi * 440 * np.arange(N) / N)
    return np.abs(stft(x, CFG))


def test_spectral_convergence_definition():
    x = np.random.default_rng(0).standard_normal(5000)
    mag = np.abs(stft(x, CFG))
    assert spectral_convergence(x, mag, CFG) < 1e-12
    assert np.isclose(spectral_convergence(x, 2 * mag, CFG), 0.5)


def test_zero_iterations_zero_phase():
    mag = tone_mag()
    out = griffin_lim(mag, iterations=0, sharpen_power=1.0, init="zero", length=N)
    ref = istft(mag.astype(complex), CFG, N)
    assert np.allclose(out.samples, ref * 0.95 / np.abs(ref).max())


def test_tone_reconstruction():
    mag = tone_mag()
    history = []
    out = griffin_lim(mag, iterations=60, sharpen_power=1.0, length=N, history=history)
    assert len(history) == 61
    assert history[-1] < 0.05
    assert max(np.diff(history)) <= 1e-7
    assert np.isclose(out.peak, 0.95)
    assert len(out.samples) == N and out.sample_rate == 22050


def test_zero_phase_start_is_also_monotone():
    history = []
    griffin_lim(tone_mag(), iterations=30, sharpen_power=1.0, init="zero", length=N, history=history)
    assert max(np.diff(history)) <= 1e-7


def test_noise_monotone():
    x = np.random.default_rng(3).standard_normal(8000)
    mag = np.abs(stft(x, CFG))
    history = []
    griffin_lim(mag, iterations=40, sharpen_power=1.0, length=8000, history=history)
    assert max(np.diff(history)) <= 1e-7


def test_sharpening_applied():
    mag = tone_mag()
    h1, h2 = [], []
    griffin_lim(mag, iterations=0, sharpen_power=1.3, length=N, history=h1)
    griffin_lim(mag ** 1.3, iterations=0, sharpen_power=1.0, length=N, history=h2)
    assert np.isclose(h1[0], h2[0])


def test_silence():
    out = griffin_lim(np.zeros((20, 513)), iterations=3)
    assert not out.samples.any() and np.isfinite(out.samples).all()


def test_deterministic():
    mag = np.abs(stft(np.random.default_rng(5).standard_normal(6000), CFG))
    a = griffin_lim(mag, iterations=10)
    b = griffin_lim(mag, iterations=10)
    assert np.array_equal(a.samples, b.samples)
