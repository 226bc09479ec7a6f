"""Dataset-level glue: encode whole datasets, cache them, and build the
feature matrix for any evaluation method."""

from __future__ import annotations

import hashlib
import json
import logging
import re
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from . import audio_features, baselines, datasets, encoding, reservoir, rng
from .errors import Unfittable

log = logging.getLogger(__name__)

CACHE_MAGIC = b"PZTENC\x00\x00"
CACHE_VERSION = 1

CUBE_METHODS = {"cube-5ns": 5.0, "cube-10ns": 10.0, "cube-20ns": 20.0}
BASELINE_METHODS = ("direct", "summed", "noise")
METHODS = tuple(CUBE_METHODS) + BASELINE_METHODS
_CUBE_RE = re.compile(r"^cube-(\d+(?:\.\d+)?)ns$")


def cube_delay(method: str) -> float | None:
    """Delay in ns encoded in a ``cube-<delay>ns`` method name, else None."""
    m = _CUBE_RE.match(method)
    if m is None or float(m.group(1)) <= 0:
        return None
    return float(m.group(1))


def check_method(method: str) -> str:
    if method in BASELINE_METHODS or cube_delay(method) is not None:
        return method
    raise ValueError(f"unknown method {method!r}; choose from {', '.join(METHODS)} "
                     f"or cube-<delay>ns")


def digest(obj) -> str:
    return hashlib.sha256(json.dumps(obj, sort_keys=True).encode()).hexdigest()[:16]


@dataclass
class EncodedDataset:
    bits: np.ndarray      # (n, 1024) uint8
    symbols: np.ndarray   # (n, 1024) uint8
    labels: np.ndarray    # (n,) uint8
    sources: list[str] = field(default_factory=list)
    params: dict = field(default_factory=dict)
    dropped: list[str] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def digest(self) -> str:
        return digest(self.params)


# --- encoding ---------------------------------------------------------------

def encode_mnist(images_path, labels_path, samples: int = 5000, seed: int = 0,
                 threshold: float = encoding.DEFAULT_THRESHOLD,
                 stratified: bool = True) -> EncodedDataset:
    images = datasets.load_idx_images(images_path)
    labels = datasets.load_idx_labels(labels_path)
    if len(images) != len(labels):
        raise ValueError(f"{len(images)} images but {len(labels)} labels")
    idx = datasets.subsample_indices(labels, samples, rng.derive_seed(seed, rng.SUBSAMPLE), stratified)
    bits = np.empty((len(idx), encoding.SEQ_LEN), np.uint8)
    symbols = np.empty_like(bits)
    for row, i in enumerate(idx):
        bits[row], symbols[row] = encoding.encode_mnist_image(images[i], threshold)
    params = {"dataset": "mnist", "images": str(Path(images_path).resolve()),
              "labels": str(Path(labels_path).resolve()), "samples": samples, "seed": seed,
              "threshold": threshold, "stratified": stratified, "version": CACHE_VERSION}
    return EncodedDataset(bits, symbols, labels[idx].astype(np.uint8),
                          [f"mnist:{i}" for i in idx], params)


def encode_clips(clips: Sequence[datasets.LabeledExample], params: dict | None = None) -> EncodedDataset:
    """MFCC-encode labelled clips, dropping (and logging) any that cannot
    produce a 32x32 matrix."""
    bits, symbols, labels, sources, dropped = [], [], [], [], []
    for ex in clips:
        try:
            spec = audio_features.mfcc32(ex.payload)
        except Unfittable as exc:
            log.warning("dropped %s: %s", ex.source or "<clip>", exc)
            dropped.append(ex.source)
            continue
        b, s = encoding.encode_spectrogram(spec)
        bits.append(b)
        symbols.append(s)
        labels.append(ex.label)
        sources.append(ex.source)
    if dropped:
        log.info("dropped %d of %d clips that cannot yield 32 frames", len(dropped), len(clips))
    shape = (len(labels), encoding.SEQ_LEN)
    return EncodedDataset(np.array(bits, np.uint8).reshape(shape),
                          np.array(symbols, np.uint8).reshape(shape),
                          np.array(labels, np.uint8), sources, dict(params or {}), dropped)


def encode_audiomnist(root, samples: int = 6000, seed: int = 0,
                      stratified: bool = True) -> EncodedDataset:
    listing = datasets.list_audiomnist(root)
    idx = datasets.subsample_indices([lab for _, lab in listing], samples,
                                     rng.derive_seed(seed, rng.SUBSAMPLE), stratified)
    root = Path(root).resolve()
    clips = []
    for i in idx:
        path, label = listing[i]
        rel = str(Path(path).resolve().relative_to(root))
        clips.append(datasets.LabeledExample(datasets.load_wav(path), label, rel))
    params = {"dataset": "audiomnist", "root": str(root), "samples": samples, "seed": seed,
              "stratified": stratified, "version": CACHE_VERSION}
    return encode_clips(clips, params)


# --- cache file -------------------------------------------------------------

def save_encoded(path, data: EncodedDataset) -> None:
    """Write ``magic | u32 version | u32 header length | JSON header | arrays``."""
    header = json.dumps({"params": data.params, "digest": data.digest, "count": len(data),
                         "sources": data.sources, "dropped": data.dropped},
                        sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(CACHE_MAGIC + struct.pack("<II", CACHE_VERSION, len(header)) + header)
        f.write(np.ascontiguousarray(data.symbols, np.uint8).tobytes())
        f.write(np.packbits(data.bits, axis=1).tobytes())
        f.write(np.ascontiguousarray(data.labels, np.uint8).tobytes())


def load_encoded(path) -> EncodedDataset:
    raw = Path(path).read_bytes()
    if raw[:8] != CACHE_MAGIC:
        raise ValueError(f"{path}: not an encoded-dataset cache")
    version, hlen = struct.unpack("<II", raw[8:16])
    if version != CACHE_VERSION:
        raise ValueError(f"{path}: cache version {version}, expected {CACHE_VERSION}")
    header = json.loads(raw[16:16 + hlen])
    n = header["count"]
    pos = 16 + hlen
    width = encoding.SEQ_LEN
    symbols = np.frombuffer(raw, np.uint8, n * width, pos).reshape(n, width).copy()
    pos += n * width
    packed = np.frombuffer(raw, np.uint8, n * width // 8, pos).reshape(n, width // 8)
    pos += n * width // 8
    labels = np.frombuffer(raw, np.uint8, n, pos).copy()
    if len(raw) != pos + n:
        raise ValueError(f"{path}: cache size does not match its header")
    return EncodedDataset(np.unpackbits(packed, axis=1), symbols, labels,
                          header["sources"], header["params"], header["dropped"])


# --- features per method ----------------------------------------------------

def reservoir_config_for(method: str, seed: int, **overrides) -> reservoir.ReservoirConfig:
    cfg = dict(delay_ns=cube_delay(check_method(method)), seed=rng.derive_seed(seed, rng.RESERVOIR))
    cfg.update(overrides)
    return reservoir.ReservoirConfig(**cfg)


def method_features(method: str, data: EncodedDataset, seed: int = 0,
                    sigma: float = 0.05, reservoir_overrides: dict | None = None,
                    trace_dir=None, progress: Callable | None = None) -> np.ndarray:
    """Feature matrix for ``method``; cube traces are cached under ``trace_dir``."""
    if method in BASELINE_METHODS:
        noise = baselines.NoiseConfig(0.0, sigma, rng.derive_seed(seed, rng.NOISE))
        return baselines.batch_features(method, data.bits, noise)
    check_method(method)
    cfg = reservoir_config_for(method, seed, **(reservoir_overrides or {}))
    cache = None
    if trace_dir is not None:
        cache = Path(trace_dir) / f"traces-{cfg.digest()}-{digest([data.params, data.sources])}.npy"
        if cache.exists():
            log.info("reusing traces from %s", cache)
            return np.load(cache)
    traces = reservoir.drive_batch(reservoir.build_reservoir(cfg), data.symbols, progress=progress)
    if cache is not None:
        cache.parent.mkdir(parents=True, exist_ok=True)
        np.save(cache, traces)
    return traces
