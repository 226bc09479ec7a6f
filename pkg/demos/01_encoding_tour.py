"""From an MNIST digit to the 1,024 symbols that drive the reservoir."""

# %%
from pathlib import Path

import numpy as np

from pzt_reservoir import datasets, encoding

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"
images = datasets.load_idx_images(DATA / "mnist5k-images-idx3-ubyte.gz")
labels = datasets.load_idx_labels(DATA / "mnist5k-labels-idx1-ubyte.gz")
print(images.shape, "images; first label", labels[0])

# %% upsample to 32x32, then threshold at 128
img = encoding.upsample_nearest(images[0])
bits2d = encoding.binarize_fixed(img)
for row in bits2d[::2]:
    print("".join("#" if b else "." for b in row))

# %% Hilbert scan keeps neighbouring pixels close together in the sequence
seq = encoding.scan_hilbert(bits2d)
print("first 10 cells on the curve:", [encoding.hilbert_index_to_xy(5, d) for d in range(10)])
print("ones in the sequence:", seq.sum())

# %% 8-bit stride-1 windows, zero padded at the tail
symbols = encoding.window_encode(seq)
print("symbols 0..15:", symbols[:16])
print("pads driven for symbol", symbols[np.argmax(symbols > 0)], "->",
      encoding.symbol_to_pads(symbols[np.argmax(symbols > 0)]))
