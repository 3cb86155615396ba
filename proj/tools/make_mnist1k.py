#!/usr/bin/env python3
"""Build the MNIST-1k IDX subset from the digit JSON files of the `mnist` npm package.

Usage: make_mnist1k.py <package/src/digits> <out_dir> [--per-class 100]

Each digit file holds flattened 28x28 images scaled to [0, 1]. The first
`per_class` images of every digit form the training split and the next
`per_class` form the test split. Pixels are rescaled to bytes.
"""
import argparse
import json
import pathlib
import struct


def write_idx_images(path, images):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), 28, 28))
        for img in images:
            f.write(bytes(img))


def write_idx_labels(path, labels):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir")
    ap.add_argument("out_dir")
    ap.add_argument("--per-class", type=int, default=100)
    args = ap.parse_args()

    n = args.per_class
    train, test = [], []
    for digit in range(10):
        data = json.load(open(pathlib.Path(args.digits_dir) / f"{digit}.json"))["data"]
        count = len(data) // 784
        assert count >= 2 * n, f"digit {digit} has only {count} samples"
        for i in range(2 * n):
            pix = [min(255, max(0, round(v * 255))) for v in data[i * 784:(i + 1) * 784]]
            (train if i < n else test).append((pix, digit))

    # interleave classes so that file order is 0,1,...,9,0,1,...
    def interleave(items):
        return [items[c * n + i] for i in range(n) for c in range(10)]

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, items in (("train", interleave(train)), ("t10k", interleave(test))):
        write_idx_images(out / f"{name}-images-idx3-ubyte", [p for p, _ in items])
        write_idx_labels(out / f"{name}-labels-idx1-ubyte", [l for _, l in items])


if __name__ == "__main__":
    main()
