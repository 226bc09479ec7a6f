"""Readout-only feature maps: the bit sequence itself, windowed bit counts,
and the bits plus Gaussian noise. All are 1,024-dimensional."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import rng
from .encoding import _check_seq, padded_windows


@dataclass(frozen=True)
class NoiseConfig:
    mu: float = 0.0
    sigma: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if self.sigma < 0:
            raise ValueError(f"sigma must be >= 0, got {self.sigma}")


def features_direct(seq) -> np.ndarray:
    return _check_seq(seq).astype(np.float64)


def features_summed(seq) -> np.ndarray:
    """Count of ones in each zero-padded stride-1 window (same windows as the symbol encoder)."""
    return padded_windows(seq).sum(axis=1, dtype=np.int64).astype(np.float64)


def features_noise(seq, cfg: NoiseConfig = NoiseConfig()) -> np.ndarray:
    bits = features_direct(seq)
    return bits + rng.generator(cfg.seed).normal(cfg.mu, cfg.sigma, size=bits.shape)


def batch_features(method: str, seqs, noise: NoiseConfig = NoiseConfig()) -> np.ndarray:
    """Feature matrix for a ``(count, 1024)`` batch.

    For ``"noise"``, row ``i`` is seeded with ``noise.seed XOR i`` so a row
    does not depend on how the batch is split.
    """
    seqs = np.asarray(seqs)
    if method == "direct":
        return np.array([features_direct(s) for s in seqs]).reshape(len(seqs), -1)
    if method == "summed":
        return np.array([features_summed(s) for s in seqs]).reshape(len(seqs), -1)
    if method == "noise":
        rows = [features_noise(s, NoiseConfig(noise.mu, noise.sigma, rng.sample_seed(noise.seed, i)))
                for i, s in enumerate(seqs)]
        return np.array(rows).reshape(len(seqs), -1)
    raise ValueError(f"unknown baseline {method!r}")
