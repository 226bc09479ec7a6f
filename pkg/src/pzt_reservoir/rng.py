"""Seed derivation.

Every random draw in the package comes from ``numpy.random.Generator`` over
the PCG64 bit generator. Each purpose gets its own stream whose seed is the
master seed plus a fixed offset, so changing how many draws one stage makes
never shifts another stage's numbers. Normal variates use numpy's ziggurat
sampler (``Generator.normal``).
"""

import numpy as np

SUBSAMPLE = 1
FOLDS = 2
RESERVOIR = 3
NOISE = 4
HOLDOUT = 5

_MASK64 = (1 << 64) - 1


def derive_seed(master_seed: int, purpose: int) -> int:
    return (int(master_seed) + purpose) & _MASK64


def sample_seed(stream_seed: int, index: int) -> int:
    """Per-sample seed, ``stream_seed XOR index``; independent of scheduling."""
    return (int(stream_seed) ^ int(index)) & _MASK64


def generator(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(int(seed) & _MASK64))
