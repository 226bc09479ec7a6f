import numpy as np
import pytest

from pzt_reservoir import rng as seeds
from pzt_reservoir.baselines import (NoiseConfig, batch_features, features_direct,
                                     features_noise, features_summed)
from pzt_reservoir.encoding import window_encode
from pzt_reservoir.errors import WrongLength


def random_seqs(n, seed=0):
    return seeds.generator(seed).integers(0, 2, (n, 1024)).astype(np.uint8)


class TestDirect:
    def test_zeros(self):
        out = features_direct(np.zeros(1024, np.uint8))
        assert out.shape == (1024,) and out.dtype == np.float64 and not out.any()

    def test_single_bit(self):
        seq = np.zeros(1024, np.uint8)
        seq[5] = 1
        assert np.flatnonzero(features_direct(seq)).tolist() == [5]

    def test_wrong_length(self):
        with pytest.raises(WrongLength):
            features_direct(np.zeros(100, np.uint8))


class TestSummed:
    def test_all_ones(self):
        out = features_summed(np.ones(1024, np.uint8))
        assert np.all(out[:1017] == 8)
        assert out[1017:].tolist() == [7, 6, 5, 4, 3, 2, 1]

    def test_zeros(self):
        assert not features_summed(np.zeros(1024, np.uint8)).any()

    def test_range(self):
        out = features_summed(random_seqs(1)[0])
        assert out.shape == (1024,) and out.min() >= 0 and out.max() <= 8

    def test_popcount_of_symbols(self):
        for seq in random_seqs(50, seed=3):
            pop = np.unpackbits(window_encode(seq)[:, None], axis=1).sum(axis=1)
            assert np.array_equal(features_summed(seq), pop)

    def test_wrong_length(self):
        with pytest.raises(WrongLength):
            features_summed(np.zeros(1023, np.uint8))


class TestNoise:
    def test_sigma_zero_is_direct(self):
        seq = random_seqs(1)[0]
        assert np.array_equal(features_noise(seq, NoiseConfig(sigma=0.0, seed=4)), features_direct(seq))

    def test_deterministic(self):
        seq = random_seqs(1)[0]
        cfg = NoiseConfig(seed=99)
        assert np.array_equal(features_noise(seq, cfg), features_noise(seq, cfg))
        assert not np.array_equal(features_noise(seq, cfg), features_noise(seq, NoiseConfig(seed=100)))

    def test_law_of_large_numbers(self):
        zeros = np.zeros(1024, np.uint8)
        draws = np.concatenate([features_noise(zeros, NoiseConfig(seed=s)) for s in range(977)])[:10**6]
        assert len(draws) == 10**6
        assert abs(draws.mean()) < 4 * 0.05 / 1000
        assert abs(draws.std() - 0.05) < 0.01 * 0.05

    def test_negative_sigma(self):
        with pytest.raises(ValueError):
            NoiseConfig(sigma=-0.1)


class TestBatch:
    @pytest.mark.parametrize("method", ["direct", "summed", "noise"])
    def test_shape(self, method):
        assert batch_features(method, random_seqs(4)).shape == (4, 1024)

    def test_noise_rows_schedule_independent(self):
        seqs = random_seqs(6)
        full = batch_features("noise", seqs, NoiseConfig(seed=7))
        for i in range(6):
            row = features_noise(seqs[i], NoiseConfig(seed=seeds.sample_seed(7, i)))
            assert np.array_equal(full[i], row)

    def test_noise_rows_differ(self):
        out = batch_features("noise", np.zeros((2, 1024), np.uint8), NoiseConfig(seed=1))
        assert not np.array_equal(out[0], out[1])

    def test_unknown(self):
        with pytest.raises(ValueError):
            batch_features("pca", random_seqs(1))
