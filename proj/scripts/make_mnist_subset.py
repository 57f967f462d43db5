"""Build a gzipped IDX MNIST subset from the digits bundled in the `mnist` npm package.

The npm package (https://www.npmjs.com/package/mnist) ships 10000 MNIST digits as
JSON arrays of pixel intensities rounded to three decimals. Multiplying by 255 and
rounding recovers the original 8-bit pixels exactly.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 scripts/make_mnist_subset.py package/src/digits data/mnist-subset
"""

import argparse
import gzip
import json
import pathlib
import struct

import numpy as np


def write_images(path, images):
    n, rows, cols = images.shape
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">IIII", 2051, n, rows, cols))
        f.write(images.astype(np.uint8).tobytes())


def write_labels(path, labels):
    with gzip.GzipFile(path, "wb", mtime=0) as f:
        f.write(struct.pack(">II", 2049, len(labels)))
        f.write(labels.astype(np.uint8).tobytes())


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--test", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    images, labels = [], []
    for k in range(10):
        data = json.loads(pathlib.Path(args.digits_dir, f"{k}.json").read_text())["data"]
        px = np.rint(np.asarray(data, dtype=np.float64) * 255.0).reshape(-1, 28, 28)
        images.append(px)
        labels.append(np.full(len(px), k))
    images = np.concatenate(images)
    labels = np.concatenate(labels)

    order = np.random.default_rng(args.seed).permutation(len(labels))
    images, labels = images[order], labels[order]
    n_train = len(labels) - args.test

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out / "train-images-idx3-ubyte.gz", images[:n_train])
    write_labels(out / "train-labels-idx1-ubyte.gz", labels[:n_train])
    write_images(out / "t10k-images-idx3-ubyte.gz", images[n_train:])
    write_labels(out / "t10k-labels-idx1-ubyte.gz", labels[n_train:])
    print(f"train={n_train} test={args.test} -> {out}")


if __name__ == "__main__":
    main()
