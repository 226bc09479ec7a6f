import os
import struct
from pathlib import Path

import numpy as np
import pytest

DATA_DIR = Path(__file__).parent / "data"

# acceptance lines collected by tests/test_acceptance.py
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def mnist_paths():
    images = os.environ.get("PZT_MNIST_IMAGES", str(DATA_DIR / "mnist5k-images-idx3-ubyte.gz"))
    labels = os.environ.get("PZT_MNIST_LABELS", str(DATA_DIR / "mnist5k-labels-idx1-ubyte.gz"))
    return images, labels


def idx_file(path, magic, dims, payload: bytes):
    path.write_bytes(struct.pack(f">{1 + len(dims)}i", magic, *dims) + payload)
    return path


@pytest.fixture
def make_idx(tmp_path):
    def _make(name, magic, dims, payload):
        return idx_file(tmp_path / name, magic, dims, bytes(payload))
    return _make


def riff(chunks) -> bytes:
    body = b"WAVE" + b"".join(cid + struct.pack("<I", len(data)) + data + b"\0" * (len(data) & 1)
                              for cid, data in chunks)
    return b"RIFF" + struct.pack("<I", len(body)) + body


def fmt_chunk(tag=1, channels=1, rate=48000, bits=16):
    block = channels * bits // 8
    return b"fmt ", struct.pack("<HHIIHH", tag, channels, rate, rate * block, block, bits)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
