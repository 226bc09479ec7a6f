"""Build gzip'd IDX files from the 5,000-image MNIST subset shipped in the
mlxtend wheel (500 training images per digit, pixels 0-255).

    pip download mlxtend --no-deps -d /tmp/wheels
    python tools/extract_mnist5k.py /tmp/wheels/mlxtend-*.whl tests/data
"""

import gzip
import io
import sys
import zipfile
from pathlib import Path

import numpy as np

from pzt_reservoir.datasets import write_idx_images, write_idx_labels

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def main(wheel: str, out_dir: str) -> None:
    raw = gzip.decompress(zipfile.ZipFile(wheel).read(MEMBER))
    table = np.loadtxt(io.BytesIO(raw), delimiter=",", dtype=np.int64)
    images = table[:, :-1].astype(np.uint8).reshape(-1, 28, 28)
    labels = table[:, -1].astype(np.uint8)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_idx_images(out / "mnist5k-images-idx3-ubyte.gz", images, compress=True)
    write_idx_labels(out / "mnist5k-labels-idx1-ubyte.gz", labels, compress=True)
    print(f"wrote {len(labels)} images, class counts {np.bincount(labels).tolist()}")


if __name__ == "__main__":
    main(*sys.argv[1:3])
