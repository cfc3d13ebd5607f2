"""Build data/mnist-5k from the 5,000-image MNIST sample bundled in the
mlxtend wheel (mlxtend/data/data/mnist_5k.csv.gz, BSD-3).

    pip download --no-deps mlxtend==0.24.0
    python3 scripts/make_mnist_subset.py mlxtend-0.24.0-py3-none-any.whl

The rows in the source are sorted by label, so they are shuffled with a fixed
seed before being written as gzipped IDX files.
"""
import gzip
import struct
import sys
import zipfile

import numpy as np

wheel = sys.argv[1]
out = sys.argv[2] if len(sys.argv) > 2 else "data/mnist-5k"

with zipfile.ZipFile(wheel) as z:
    raw = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()
rows = np.array([[int(v) for v in line.split(",")] for line in raw.splitlines()])
pixels, labels = rows[:, :-1].astype(np.uint8), rows[:, -1].astype(np.uint8)
perm = np.random.RandomState(0).permutation(len(labels))
pixels, labels = pixels[perm], labels[perm]

with gzip.GzipFile(f"{out}/images-idx3-ubyte.gz", "wb", mtime=0) as f:
    f.write(struct.pack(">IIII", 0x00000803, len(labels), 28, 28))
    f.write(pixels.tobytes())
with gzip.GzipFile(f"{out}/labels-idx1-ubyte.gz", "wb", mtime=0) as f:
    f.write(struct.pack(">II", 0x00000801, len(labels)))
    f.write(labels.tobytes())
