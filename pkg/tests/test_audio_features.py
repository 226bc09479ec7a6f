import math

import numpy as np
import pytest

from pzt_reservoir.audio_features import (LOG_FLOOR, N_FFT, dct_matrix, hz_to_mel, mel_edges,
                                          mel_filterbank, mfcc32, power_spectrogram)
from pzt_reservoir.datasets import AudioClip
from pzt_reservoir.errors import InvalidParams, NegativeFrequency, TooShort, Unfittable


def naive_dft_power(frame):
    n = len(frame)
    k = np.arange(n // 2 + 1)[:, None]
    t = np.arange(n)[None, :]
    re = (frame * np.cos(2 * np.pi * k * t / n)).sum(axis=1)
    im = -(frame * np.sin(2 * np.pi * k * t / n)).sum(axis=1)
    return re ** 2 + im ** 2


class TestMel:
    def test_zero(self):
        assert hz_to_mel(0.0) == 0.0

    def test_700(self):
        assert hz_to_mel(700.0) == pytest.approx(2595 * math.log10(2), rel=1e-12)

    def test_6300(self):
        assert hz_to_mel(6300.0) == pytest.approx(2595.0, rel=1e-12)

    def test_negative(self):
        with pytest.raises(NegativeFrequency):
            hz_to_mel(-1.0)

    def test_strictly_increasing(self):
        assert np.all(np.diff(hz_to_mel(np.linspace(0, 24000, 1000))) > 0)


class TestFilterbank:
    def test_rows_nonnegative_nonzero(self):
        fb = mel_filterbank(32, 2048, 48000)
        assert fb.shape == (32, 1025)
        assert np.all(fb >= 0) and np.all(fb.max(axis=1) > 0)

    def test_peaks_nondecreasing(self):
        peaks = mel_filterbank(32, 2048, 48000).argmax(axis=1)
        assert np.all(np.diff(peaks) >= 0)

    def test_coverage_between_outer_edges(self):
        sr, n_fft = 48000, 2048
        fb = mel_filterbank(32, n_fft, sr)
        edges = mel_edges(32, sr)
        freqs = np.arange(n_fft // 2 + 1) * sr / n_fft
        inside = (freqs > edges[0]) & (freqs < edges[-1])
        assert inside.sum() > 1000
        assert np.all(fb[:, inside].sum(axis=0) > 0)

    def test_edges(self):
        edges = mel_edges(32, 48000)
        assert len(edges) == 34
        assert edges[0] == 0.0 and edges[-1] == pytest.approx(24000.0)

    def test_triangle_shape(self):
        # filter m peaks near edge m+1 and vanishes outside (edge m, edge m+2)
        sr, n_fft = 16000, 2048
        fb = mel_filterbank(32, n_fft, sr)
        edges = mel_edges(32, sr)
        freqs = np.arange(n_fft // 2 + 1) * sr / n_fft
        for m in (0, 10, 31):
            support = freqs[fb[m] > 0]
            assert support.min() > edges[m] and support.max() < edges[m + 2]

    @pytest.mark.parametrize("kw", [dict(n_fft=1000), dict(sample_rate=0), dict(n_fft=16)])
    def test_invalid(self, kw):
        args = dict(n_mels=32, n_fft=2048, sample_rate=48000) | kw
        with pytest.raises(InvalidParams):
            mel_filterbank(**args)


class TestPowerSpectrogram:
    def test_silence(self):
        out = power_spectrogram(AudioClip(8000, np.zeros(5000)), 1024, 256)
        assert out.shape == (513, (5000 - 1024) // 256 + 1)
        assert not out.any()

    def test_matches_naive_dft(self, rng):
        x = rng.standard_normal(300)
        out = power_spectrogram(AudioClip(8000, x), 256, 44)
        window = 0.5 - 0.5 * np.cos(2 * np.pi * np.arange(256) / 256)
        for t in range(out.shape[1]):
            np.testing.assert_allclose(out[:, t], naive_dft_power(x[t * 44:t * 44 + 256] * window),
                                       rtol=1e-9, atol=1e-9)

    def test_bin_centred_sinusoid(self):
        sr, n = 48000, 2048
        k = 100
        x = np.sin(2 * np.pi * k * sr / n * np.arange(4 * n) / sr)
        power = power_spectrogram(AudioClip(sr, x), n, n)[:, 0]
        ref = naive_dft_power(x[:n] * (0.5 - 0.5 * np.cos(2 * np.pi * np.arange(n) / n)))
        np.testing.assert_allclose(power, ref, rtol=1e-9, atol=1e-6)
        assert power.argmax() == k
        # a periodic Hann window spreads the tone over bins k-1, k, k+1 in 1/4 : 1 : 1/4
        assert power[k - 1:k + 2].sum() >= 0.9 * power.sum()
        assert power[k] / power.sum() == pytest.approx(2 / 3, rel=1e-6)

    def test_too_short(self):
        with pytest.raises(TooShort):
            power_spectrogram(AudioClip(8000, np.zeros(100)), 256, 10)


class TestDct:
    def test_orthonormal(self):
        t = dct_matrix(32)
        assert np.max(np.abs(t @ t.T - np.eye(32))) < 1e-9

    def test_against_definition(self, rng):
        v = rng.standard_normal(32)
        n = 32
        ref = [sum(v[i] * math.cos(math.pi * k * (2 * i + 1) / (2 * n)) for i in range(n))
               * math.sqrt((1 if k == 0 else 2) / n) for k in range(n)]
        np.testing.assert_allclose(dct_matrix(32) @ v, ref, rtol=1e-12, atol=1e-12)


class TestMfcc:
    def test_too_short_clip(self):
        with pytest.raises(Unfittable):
            mfcc32(AudioClip(48000, np.zeros(480)))

    def test_just_long_enough(self):
        assert mfcc32(AudioClip(48000, np.zeros(N_FFT + 31))).shape == (32, 32)
        with pytest.raises(Unfittable):
            mfcc32(AudioClip(48000, np.zeros(N_FFT + 30)))

    def test_silence(self):
        out = mfcc32(AudioClip(48000, np.zeros(48000)))
        assert out.shape == (32, 32)
        # DCT of a constant vector keeps only the DC term
        np.testing.assert_allclose(out[0], math.sqrt(32) * math.log(LOG_FLOOR), rtol=1e-12)
        assert np.max(np.abs(out[1:])) < 1e-9
        assert np.all(out == out[:, :1])

    def test_deterministic_and_finite(self, rng):
        clip = AudioClip(48000, rng.uniform(-0.5, 0.5, 30000))
        a, b = mfcc32(clip), mfcc32(clip)
        assert np.array_equal(a, b)
        assert np.all(np.isfinite(a))

    @pytest.mark.parametrize("seconds", [0.3, 0.55, 0.8, 1.0])
    def test_audiomnist_lengths(self, seconds, rng):
        n = int(48000 * seconds)
        tone = np.sin(2 * np.pi * 220 * np.arange(n) / 48000) * np.hanning(n)
        out = mfcc32(AudioClip(48000, 0.3 * tone + 1e-3 * rng.standard_normal(n)))
        assert out.shape == (32, 32) and np.all(np.isfinite(out))
