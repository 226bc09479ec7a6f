"""Dataset ingestion: MNIST IDX files, 16-bit PCM WAV clips, AudioMNIST trees.

Images are plain ``uint8`` arrays of shape ``(rows, cols)``; a batch of
images is a ``(count, rows, cols)`` array. IDX files may be gzip-compressed,
which is detected from the leading bytes rather than the file name.
"""

from __future__ import annotations

import gzip
import io
import os
import struct
import wave
from dataclasses import dataclass
from pathlib import Path
from typing import Any, NamedTuple, Sequence

import numpy as np

from . import rng
from .errors import (
    Corrupt,
    InsufficientClass,
    InvalidLabel,
    MagicMismatch,
    NotDivisible,
    Truncated,
    UnsupportedFormat,
)

IDX_IMAGE_MAGIC = 2051
IDX_LABEL_MAGIC = 2049
N_CLASSES = 10


@dataclass(frozen=True)
class AudioClip:
    sample_rate: int
    samples: np.ndarray

    def __post_init__(self):
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("audio samples must be finite")

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


class LabeledExample(NamedTuple):
    payload: Any
    label: int
    source: str = ""


# ---------------------------------------------------------------------------
# IDX
# ---------------------------------------------------------------------------

def _read_bytes(path) -> bytes:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:2] == b"\x1f\x8b":
        raw = gzip.decompress(raw)
    return raw


def _idx_header(raw: bytes, expected_magic: int, n_dims: int, path) -> tuple[int, ...]:
    size = 4 * (1 + n_dims)
    if len(raw) < size:
        raise Truncated(f"{path}: header needs {size} bytes, file has {len(raw)}")
    magic, *dims = struct.unpack(f">{1 + n_dims}i", raw[:size])
    if magic != expected_magic:
        raise MagicMismatch(f"{path}: magic {magic}, expected {expected_magic}")
    return tuple(dims)


def load_idx_images(path) -> np.ndarray:
    """Read an IDX3 image file into a ``(count, rows, cols)`` uint8 array."""
    raw = _read_bytes(path)
    count, rows, cols = _idx_header(raw, IDX_IMAGE_MAGIC, 3, path)
    need = count * rows * cols
    payload = raw[16:]
    if len(payload) < need:
        raise Truncated(f"{path}: header promises {need} pixel bytes, found {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8, count=need).reshape(count, rows, cols).copy()


def load_idx_labels(path) -> np.ndarray:
    """Read an IDX1 label file; every label must be a digit 0-9."""
    raw = _read_bytes(path)
    (count,) = _idx_header(raw, IDX_LABEL_MAGIC, 1, path)
    payload = raw[8:]
    if len(payload) < count:
        raise Truncated(f"{path}: header promises {count} labels, found {len(payload)}")
    labels = np.frombuffer(payload, dtype=np.uint8, count=count).copy()
    bad = np.flatnonzero(labels > 9)
    if bad.size:
        raise InvalidLabel(f"{path}: label {labels[bad[0]]} at index {bad[0]} is not a digit")
    return labels


def idx_images_bytes(images: np.ndarray) -> bytes:
    images = np.asarray(images, dtype=np.uint8)
    count, rows, cols = images.shape
    return struct.pack(">4i", IDX_IMAGE_MAGIC, count, rows, cols) + images.tobytes()


def idx_labels_bytes(labels: Sequence[int]) -> bytes:
    labels = np.asarray(labels, dtype=np.uint8)
    return struct.pack(">2i", IDX_LABEL_MAGIC, len(labels)) + labels.tobytes()


def write_idx_images(path, images: np.ndarray, compress: bool = False) -> None:
    data = idx_images_bytes(images)
    Path(path).write_bytes(gzip.compress(data, mtime=0) if compress else data)


def write_idx_labels(path, labels: Sequence[int], compress: bool = False) -> None:
    data = idx_labels_bytes(labels)
    Path(path).write_bytes(gzip.compress(data, mtime=0) if compress else data)


# ---------------------------------------------------------------------------
# WAV
# ---------------------------------------------------------------------------

def parse_wav(raw: bytes, path="<bytes>") -> AudioClip:
    """Decode 16-bit mono PCM. Chunk walking is left to the stdlib ``wave``
    module; its errors are mapped onto the package's error types."""
    try:
        with wave.open(io.BytesIO(raw), "rb") as w:
            channels, width, rate = w.getnchannels(), w.getsampwidth(), w.getframerate()
            frames = w.readframes(w.getnframes())
    except wave.Error as exc:
        if str(exc).startswith("unknown format"):
            raise UnsupportedFormat(f"{path}: {exc}, only PCM is supported") from exc
        raise Corrupt(f"{path}: {exc}") from exc
    except EOFError as exc:
        raise Corrupt(f"{path}: truncated chunk header") from exc
    if channels != 1:
        raise UnsupportedFormat(f"{path}: {channels} channels, only mono is supported")
    if width != 2:
        raise UnsupportedFormat(f"{path}: {8 * width}-bit samples, only 16-bit is supported")
    if rate == 0:
        raise Corrupt(f"{path}: sample rate is zero")
    # a trailing odd byte is dropped, truncated data chunks are common in the wild
    ints = np.frombuffer(frames, dtype="<i2", count=len(frames) // 2)
    return AudioClip(sample_rate=rate, samples=ints.astype(np.float64) / 32768.0)


def load_wav(path) -> AudioClip:
    """Decode a 16-bit mono PCM WAV file to amplitudes in [-1, 1)."""
    with open(path, "rb") as f:
        return parse_wav(f.read(), path)


def wav_bytes(samples: np.ndarray, sample_rate: int) -> bytes:
    """Encode float amplitudes as a 16-bit mono PCM WAV (clipped to range)."""
    ints = np.clip(np.round(np.asarray(samples) * 32768.0), -32768, 32767).astype("<i2")
    buf = io.BytesIO()
    with wave.open(buf, "wb") as w:
        w.setnchannels(1)
        w.setsampwidth(2)
        w.setframerate(sample_rate)
        w.writeframes(ints.tobytes())
    return buf.getvalue()


def write_wav(path, samples: np.ndarray, sample_rate: int) -> None:
    Path(path).write_bytes(wav_bytes(samples, sample_rate))


# ---------------------------------------------------------------------------
# AudioMNIST directory layout
# ---------------------------------------------------------------------------

def list_audiomnist(root) -> list[tuple[str, int]]:
    """Return ``(path, label)`` for every ``<speaker>/<digit>_*.wav`` under root.

    Sorted by path so the listing does not depend on filesystem order.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"AudioMNIST root {root} is not a directory")
    found = []
    for dirpath, _, files in os.walk(root):
        for name in files:
            if not name.lower().endswith(".wav") or not name[:1].isdigit():
                continue
            found.append((os.path.join(dirpath, name), int(name[0])))
    found.sort()
    return found


def load_audiomnist(root) -> list[LabeledExample]:
    return [LabeledExample(load_wav(p), label, p) for p, label in list_audiomnist(root)]


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------

def subsample_indices(labels: Sequence[int], n: int, seed: int,
                      stratified: bool = True) -> np.ndarray:
    """Indices of a seeded subsample of size ``n``.

    One permutation of the whole index range is drawn; the stratified
    variant walks it and keeps each index until its class holds ``n/10``.
    The returned indices keep permutation order.
    """
    labels = np.asarray(labels)
    if stratified and n % N_CLASSES:
        raise NotDivisible(f"n={n} is not divisible by {N_CLASSES}")
    if n > len(labels) or n < 0:
        raise InsufficientClass(f"cannot draw {n} examples from {len(labels)}")
    perm = rng.generator(seed).permutation(len(labels))
    if not stratified:
        return perm[:n]

    per_class = n // N_CLASSES
    counts = np.bincount(labels, minlength=N_CLASSES)
    short = [c for c in range(N_CLASSES) if counts[c] < per_class]
    if short:
        raise InsufficientClass(
            f"classes {short} have fewer than {per_class} members "
            f"(counts {counts[short].tolist()})")
    taken = np.zeros(N_CLASSES, dtype=int)
    keep = []
    for i in perm:
        c = labels[i]
        if taken[c] < per_class:
            taken[c] += 1
            keep.append(i)
            if len(keep) == n:
                break
    return np.asarray(keep, dtype=np.int64)


def stratified_subsample(examples: Sequence[LabeledExample], n: int, seed: int,
                         stratified: bool = True) -> list[LabeledExample]:
    """Draw ``n/10`` examples of every digit (or ``n`` uniformly when
    ``stratified`` is False) using a seeded shuffle."""
    idx = subsample_indices([e.label for e in examples], n, seed, stratified)
    return [examples[i] for i in idx]
