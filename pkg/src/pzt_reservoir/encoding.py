"""Turning 2D binary images into the 1,024-symbol drive sequences.

Conventions pinned here and relied on by the reservoir simulator:

* grid coordinates are ``(x, y)`` with ``x`` the column and ``y`` the row,
  so the cell at ``(x, y)`` is ``img[y, x]``;
* the 8-bit window covering bits ``i .. i+7`` turns the earliest bit into
  the most significant bit, which drives pad 7;
* the 1,024-bit sequence is extended with 7 zero bits so that exactly
  1,024 windows exist (the first 1,017 of them are the unpadded ones).
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import IndexOutOfRange, NonFinite, WrongLength, WrongShape

SIDE = 32
SEQ_LEN = SIDE * SIDE
WINDOW = 8
DEFAULT_THRESHOLD = 128
HILBERT_ORDER = 5

_MSB_WEIGHTS = (1 << np.arange(WINDOW - 1, -1, -1)).astype(np.int64)


def _check_shape(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    img = np.asarray(img)
    if img.shape != shape:
        raise WrongShape(f"expected shape {shape}, got {img.shape}")
    return img


def _check_seq(seq) -> np.ndarray:
    seq = np.asarray(seq)
    if seq.shape != (SEQ_LEN,):
        raise WrongLength(f"expected a {SEQ_LEN}-bit sequence, got shape {seq.shape}")
    return seq


# --- image preprocessing ---------------------------------------------------

def upsample_nearest(img: np.ndarray) -> np.ndarray:
    """28x28 -> 32x32 nearest neighbour; output (r, c) reads input (r*28//32, c*28//32)."""
    img = _check_shape(img, (28, 28))
    src = (np.arange(SIDE) * 28) // SIDE
    return img[np.ix_(src, src)]


def binarize_fixed(img: np.ndarray, threshold: float = DEFAULT_THRESHOLD) -> np.ndarray:
    img = _check_shape(img, (SIDE, SIDE))
    return (img >= threshold).astype(np.uint8)


def binarize_mean(matrix: np.ndarray) -> np.ndarray:
    """1 where a value is strictly above the mean of all 1,024 values."""
    matrix = _check_shape(matrix, (SIDE, SIDE)).astype(np.float64)
    if not np.all(np.isfinite(matrix)):
        raise NonFinite("matrix contains NaN or infinite values")
    return (matrix > matrix.mean()).astype(np.uint8)


# --- Hilbert curve ---------------------------------------------------------

def hilbert_index_to_xy(order: int, d: int) -> tuple[int, int]:
    """Map index ``d`` on the order-``order`` Hilbert curve to ``(x, y)``.

    Iterative quadrant unfolding; the curve starts at (0, 0) and ends at
    (2**order - 1, 0).
    """
    n = 1 << order
    if not 0 <= d < n * n:
        raise IndexOutOfRange(f"index {d} outside [0, {n * n}) for order {order}")
    x = y = 0
    t = d
    s = 1
    while s < n:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x, y = s - 1 - x, s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    return x, y


@lru_cache(maxsize=None)
def hilbert_path(order: int) -> tuple[np.ndarray, np.ndarray]:
    """Row and column index arrays visiting the grid in curve order."""
    xy = np.array([hilbert_index_to_xy(order, d) for d in range(4 ** order)])
    rows, cols = xy[:, 1].copy(), xy[:, 0].copy()
    rows.flags.writeable = False
    cols.flags.writeable = False
    return rows, cols


def scan_hilbert(img: np.ndarray) -> np.ndarray:
    img = _check_shape(img, (SIDE, SIDE))
    rows, cols = hilbert_path(HILBERT_ORDER)
    return img[rows, cols].astype(np.uint8)


def scan_vertical(img: np.ndarray) -> np.ndarray:
    """Column-major read: column 0 top to bottom, then column 1, ..."""
    img = _check_shape(img, (SIDE, SIDE))
    return img.T.reshape(-1).astype(np.uint8)


# --- windowing -------------------------------------------------------------

def padded_windows(seq) -> np.ndarray:
    """``(1024, 8)`` view of the zero-padded stride-1 windows."""
    seq = _check_seq(seq)
    padded = np.concatenate([seq.astype(np.uint8), np.zeros(WINDOW - 1, np.uint8)])
    return np.lib.stride_tricks.sliding_window_view(padded, WINDOW)


def window_encode(seq) -> np.ndarray:
    """Pack each 8-bit window into one symbol, earliest bit as MSB."""
    return (padded_windows(seq) @ _MSB_WEIGHTS).astype(np.uint8)


def symbol_to_pads(symbols) -> np.ndarray:
    """Decode symbols into ``(..., 8)`` pad drives; column ``p`` is pad ``p``."""
    symbols = np.asarray(symbols, dtype=np.uint8)
    return ((symbols[..., None] >> np.arange(WINDOW)) & 1).astype(np.float64)


# --- whole-dataset helpers -------------------------------------------------

def encode_mnist_image(img: np.ndarray, threshold: float = DEFAULT_THRESHOLD):
    """28x28 grayscale -> (bit sequence, symbol stream)."""
    bits = scan_hilbert(binarize_fixed(upsample_nearest(img), threshold))
    return bits, window_encode(bits)


def encode_spectrogram(spec: np.ndarray):
    """32x32 MFCC matrix -> (bit sequence, symbol stream)."""
    bits = scan_vertical(binarize_mean(spec))
    return bits, window_encode(bits)


def to_hex(values, packed: bool = False) -> str:
    """Hex text of a symbol stream, or of a bit sequence when ``packed``
    (eight bits per byte, earliest bit first)."""
    values = np.asarray(values, dtype=np.uint8)
    if packed:
        values = np.packbits(values)
    return values.tobytes().hex()


def dump_hex(path, rows, packed: bool = False) -> None:
    """Write one hex-encoded sequence or stream per line."""
    with open(path, "w") as f:
        for r in rows:
            f.write(to_hex(r, packed) + "\n")
