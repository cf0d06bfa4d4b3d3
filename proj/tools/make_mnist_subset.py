#!/usr/bin/env python3
"""Write a 5000-digit MNIST subset as IDX files.

The digits come from the 5k MNIST sample bundled in the mlxtend wheel
(500 per class, stored class-sorted). They are shuffled with a fixed seed so
that any prefix of the file is class-balanced, then written as
images (IDX3, magic 0x00000803) and labels (IDX1, magic 0x00000801).

Usage: make_mnist_subset.py OUT_DIR
"""
import glob
import gzip
import io
import os
import struct
import subprocess
import sys
import tempfile
import zipfile

import numpy as np

SHUFFLE_SEED = 20200721


def fetch_csv() -> bytes:
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps",
                        "-q", "-d", tmp, "mlxtend==0.24.0"], check=True)
        wheel = glob.glob(os.path.join(tmp, "mlxtend-*.whl"))[0]
        with zipfile.ZipFile(wheel) as z:
            return gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz"))


def main() -> int:
    if len(sys.argv) != 2:
        print(__doc__, file=sys.stderr)
        return 2
    out = sys.argv[1]
    os.makedirs(out, exist_ok=True)
    table = np.loadtxt(io.BytesIO(fetch_csv()), delimiter=",", dtype=np.float64)
    pixels = table[:, :784].astype(np.uint8)
    labels = table[:, 784].astype(np.uint8)
    order = np.random.default_rng(SHUFFLE_SEED).permutation(len(labels))
    pixels, labels = pixels[order], labels[order]

    with open(os.path.join(out, "mnist5k-images-idx3-ubyte"), "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(labels), 28, 28))
        f.write(pixels.tobytes())
    with open(os.path.join(out, "mnist5k-labels-idx1-ubyte"), "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(labels.tobytes())
    print(f"wrote {len(labels)} digits to {out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
