import math
import os
import subprocess
import sys

import numpy as np
import pytest

from pzt_reservoir import rng as seeds
from pzt_reservoir.errors import ConfigInvalid, InvalidParams, NoConvergence, WrongLength
from pzt_reservoir.reservoir import (TRACE_LEN, ReservoirConfig, build_reservoir, delay_to_leak,
                                     drive, drive_batch, dump_traces, spectral_radius)


@pytest.fixture(scope="module")
def res():
    return build_reservoir(ReservoirConfig())


@pytest.fixture(scope="module")
def stream():
    return seeds.generator(7).integers(0, 256, 1024).astype(np.uint8)


def reference_trace(r, stream, x0=None):
    """Direct transcription of the update rule, one substep at a time."""
    x = np.zeros(r.config.n_nodes) if x0 is None else x0.copy()
    out = []
    for s in stream:
        u = np.array([(int(s) >> p) & 1 for p in range(8)], dtype=float)
        for _ in range(r.config.substeps_per_symbol):
            x = (1 - r.leak) * x + r.leak * np.tanh(r.weights @ x + r.input_weights @ u + r.bias)
            out.append(math.tanh(r.probe @ x))
    return np.array(out)


class TestSpectralRadius:
    def test_identity(self):
        assert spectral_radius(np.eye(4)) == pytest.approx(1.0, abs=1e-12)

    def test_diagonal(self):
        assert spectral_radius(np.diag([0.5, 2.0])) == pytest.approx(2.0, abs=1e-12)

    @pytest.mark.parametrize("seed", range(8))
    def test_matches_dense_eigensolver(self, seed):
        m = seeds.generator(seed).standard_normal((16, 16))
        assert abs(spectral_radius(m) - np.max(np.abs(np.linalg.eigvals(m)))) < 1e-6

    def test_rotation(self):
        # dominant eigenvalues are a complex pair of modulus 3
        m = np.zeros((4, 4))
        m[:2, :2] = 3 * np.array([[0.0, -1.0], [1.0, 0.0]])
        m[2, 2], m[3, 3] = 1.0, -0.5
        assert spectral_radius(m) == pytest.approx(3.0, abs=1e-9)

    def test_zero_and_nilpotent(self):
        assert spectral_radius(np.zeros((3, 3))) == 0.0
        assert spectral_radius(np.diag([1.0, 1.0], k=1)) == pytest.approx(0.0, abs=1e-6)

    def test_no_convergence(self):
        m = seeds.generator(0).standard_normal((40, 40))
        with pytest.raises(NoConvergence):
            spectral_radius(m, max_iter=3)

    def test_rejects_nonsquare(self):
        with pytest.raises(ValueError):
            spectral_radius(np.ones((2, 3)))


class TestBuild:
    def test_deterministic(self):
        assert build_reservoir(ReservoirConfig(seed=5)).same_as(build_reservoir(ReservoirConfig(seed=5)))
        assert not build_reservoir(ReservoirConfig(seed=5)).same_as(build_reservoir(ReservoirConfig(seed=6)))

    def test_spectral_radius(self, res):
        assert abs(np.max(np.abs(np.linalg.eigvals(res.weights))) - 0.95) < 1e-6

    def test_shapes_and_ranges(self, res):
        assert res.weights.shape == (64, 64)
        assert res.input_weights.shape == (64, 8)
        assert np.all(np.abs(res.input_weights) <= 1.0)
        assert np.all(np.abs(res.bias) <= 0.1)
        assert abs(np.linalg.norm(res.probe) - 1.0) < 1e-12
        assert res.leak == pytest.approx(delay_to_leak(10, 20, 8))

    def test_immutable(self, res):
        with pytest.raises(ValueError):
            res.weights[0, 0] = 1.0

    @pytest.mark.parametrize("kw", [dict(n_nodes=0), dict(spectral_radius_target=1.0),
                                    dict(spectral_radius_target=0.0), dict(tau_ns=0),
                                    dict(substeps_per_symbol=4)])
    def test_invalid_config(self, kw):
        with pytest.raises(ConfigInvalid):
            build_reservoir(ReservoirConfig(**kw))


class TestLeak:
    def test_value(self):
        assert delay_to_leak(10, 20, 8) == pytest.approx(1 - math.exp(-0.0625), rel=1e-12)
        assert delay_to_leak(10, 20, 8) == pytest.approx(0.06059, abs=5e-6)

    def test_clamped(self):
        assert delay_to_leak(1e-12, 20, 8) == 1e-6
        assert delay_to_leak(1e9, 1e-3, 8) == 1 - 1e-6

    def test_monotone(self):
        assert delay_to_leak(5, 20) < delay_to_leak(10, 20) < delay_to_leak(20, 20)

    def test_invalid(self):
        with pytest.raises(InvalidParams):
            delay_to_leak(0, 20)


class TestDrive:
    def test_matches_reference(self, res):
        short = seeds.generator(3).integers(0, 256, 1024).astype(np.uint8)
        ref = reference_trace(res, short[:40])
        got = drive(res, short)[:len(ref)]
        np.testing.assert_allclose(got, ref, rtol=0, atol=1e-12)

    def test_zero_fixed_point(self):
        r = build_reservoir(ReservoirConfig(bias_scale=0.0))
        assert not drive(r, np.zeros(1024, np.uint8)).any()

    def test_contract(self, res, stream):
        t = drive(res, stream)
        assert t.shape == (TRACE_LEN,)
        assert np.all(np.isfinite(t)) and np.all(np.abs(t) < 1)

    def test_pure(self, res, stream):
        assert np.array_equal(drive(res, stream), drive(res, stream))

    def test_wrong_length(self, res):
        with pytest.raises(WrongLength):
            drive(res, np.zeros(1017, np.uint8))

    def test_batch_matches_single(self, res):
        streams = seeds.generator(11).integers(0, 256, (7, 1024)).astype(np.uint8)
        batch = drive_batch(res, streams, chunk=3)
        for i in range(7):
            assert np.array_equal(batch[i], drive(res, streams[i]))

    def test_delay_changes_dynamics(self, stream):
        a = drive(build_reservoir(ReservoirConfig(delay_ns=5)), stream)
        b = drive(build_reservoir(ReservoirConfig(delay_ns=20)), stream)
        assert np.max(np.abs(a - b)) > 1e-3


def test_thread_count_independence(res, tmp_path):
    streams = seeds.generator(2).integers(0, 256, (6, 1024)).astype(np.uint8)
    np.save(tmp_path / "streams.npy", streams)
    code = (
        "import numpy as np, sys\n"
        "from pzt_reservoir.reservoir import ReservoirConfig, build_reservoir, drive_batch\n"
        "s = np.load(sys.argv[1])\n"
        "np.save(sys.argv[2], drive_batch(build_reservoir(ReservoirConfig()), s, chunk=4))\n"
    )
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    subprocess.run([sys.executable, "-c", code, str(tmp_path / "streams.npy"), str(tmp_path / "t.npy")],
                   check=True, env=env)
    assert np.array_equal(np.load(tmp_path / "t.npy"), drive_batch(res, streams, threads=1))


def test_dump(tmp_path, res, stream):
    t = drive(res, stream)
    dump_traces(tmp_path / "t.csv", [t, t])
    lines = (tmp_path / "t.csv").read_text().splitlines()
    assert len(lines) == 2
    assert np.array_equal(np.array(lines[0].split(","), dtype=float), t)
