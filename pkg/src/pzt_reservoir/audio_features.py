"""32x32 MFCC matrices for spoken-digit clips.

Fixed featurization: 2048-point Hann-windowed frames, power spectrum, 32
triangular HTK-mel filters spanning 0 Hz to Nyquist, natural log with a
1e-10 floor, orthonormal DCT-II over the mel axis. No pre-emphasis, no
liftering. The hop is chosen per clip so that exactly 32 frames fit.
"""

from __future__ import annotations

import numpy as np

from .datasets import AudioClip
from .errors import InvalidParams, NegativeFrequency, TooShort, Unfittable

N_MELS = 32
N_FRAMES = 32
N_FFT = 2048
LOG_FLOOR = 1e-10


def hz_to_mel(f):
    """HTK mel scale, ``2595 * log10(1 + f / 700)``."""
    f = np.asarray(f, dtype=np.float64)
    if np.any(f < 0):
        raise NegativeFrequency(f"negative frequency in {f}")
    out = 2595.0 * np.log10(1.0 + f / 700.0)
    return float(out) if out.ndim == 0 else out


def mel_to_hz(m):
    m = np.asarray(m, dtype=np.float64)
    return 700.0 * (10.0 ** (m / 2595.0) - 1.0)


def mel_edges(n_mels: int, sample_rate: float) -> np.ndarray:
    """``n_mels + 2`` edge frequencies in Hz, evenly spaced in mel."""
    return mel_to_hz(np.linspace(0.0, hz_to_mel(sample_rate / 2.0), n_mels + 2))


def mel_filterbank(n_mels: int = N_MELS, n_fft: int = N_FFT,
                   sample_rate: float = 48000) -> np.ndarray:
    """Triangular filters, shape ``(n_mels, n_fft // 2 + 1)``.

    Filter ``m`` rises from edge ``m`` to a peak of 1 at edge ``m + 1`` and
    falls back to zero at edge ``m + 2``; weights are evaluated at the FFT
    bin centre frequencies.
    """
    if n_fft < 2 or n_fft & (n_fft - 1):
        raise InvalidParams(f"n_fft must be a power of two, got {n_fft}")
    if sample_rate <= 0 or n_mels < 1:
        raise InvalidParams(f"bad filterbank parameters n_mels={n_mels}, sample_rate={sample_rate}")
    edges = mel_edges(n_mels, sample_rate)
    freqs = np.arange(n_fft // 2 + 1) * sample_rate / n_fft
    lo, mid, hi = edges[:-2, None], edges[1:-1, None], edges[2:, None]
    rising = (freqs - lo) / (mid - lo)
    falling = (hi - freqs) / (hi - mid)
    weights = np.maximum(0.0, np.minimum(rising, falling))
    empty = np.flatnonzero(weights.max(axis=1) <= 0)
    if empty.size:
        raise InvalidParams(
            f"mel filters {empty.tolist()} cover no FFT bin; n_fft={n_fft} is too small "
            f"for {n_mels} bands at {sample_rate} Hz")
    return weights


def power_spectrogram(clip: AudioClip, n_fft: int = N_FFT, hop: int = 512) -> np.ndarray:
    """Squared-magnitude STFT, shape ``(n_fft // 2 + 1, n_frames)``, no padding."""
    x = np.asarray(clip.samples, dtype=np.float64)
    if hop < 1:
        raise InvalidParams(f"hop must be >= 1, got {hop}")
    if len(x) < n_fft:
        raise TooShort(f"clip has {len(x)} samples, need at least {n_fft}")
    frames = np.lib.stride_tricks.sliding_window_view(x, n_fft)[::hop]
    window = np.hanning(n_fft + 1)[:-1]  # periodic Hann
    return (np.abs(np.fft.rfft(frames * window, axis=1)) ** 2).T


def dct_matrix(n: int = N_MELS) -> np.ndarray:
    """Orthonormal DCT-II matrix; ``dct_matrix(n) @ v`` transforms ``v``."""
    k = np.arange(n)[:, None]
    i = np.arange(n)[None, :]
    t = np.cos(np.pi * k * (2 * i + 1) / (2 * n)) * np.sqrt(2.0 / n)
    t[0] /= np.sqrt(2.0)
    return t


def mfcc_hop(n_samples: int, n_fft: int = N_FFT) -> int:
    return (n_samples - n_fft) // (N_FRAMES - 1)


def mfcc32(clip: AudioClip) -> np.ndarray:
    """32 cepstral coefficients x 32 frames.

    Raises Unfittable when the clip is too short for 32 frames with a hop of
    at least one sample; callers drop such clips.
    """
    hop = mfcc_hop(len(clip.samples))
    if len(clip.samples) < N_FFT or hop < 1:
        raise Unfittable(f"{len(clip.samples)} samples cannot yield {N_FRAMES} frames of {N_FFT}")
    power = power_spectrogram(clip, N_FFT, hop)
    if power.shape[1] < N_FRAMES:
        raise Unfittable(f"only {power.shape[1]} frames")
    mel = mel_filterbank(N_MELS, N_FFT, clip.sample_rate) @ power[:, :N_FRAMES]
    return dct_matrix(N_MELS) @ np.log(mel + LOG_FLOOR)


def dump_csv(path, spectrogram: np.ndarray) -> None:
    np.savetxt(path, spectrogram, delimiter=",", fmt="%.17g")
