#!/usr/bin/env python3
"""Convert the digit subset bundled with the npm `mnist` package into IDX files.

The package ships 10,000 MNIST digits (1,000 per class) as JSON arrays of
28x28 intensities in [0, 1]. This writes them as standard big-endian IDX
image/label files in a fixed interleaved order so they can be streamed
like the original training set.

    npm pack mnist && tar xzf mnist-*.tgz
    python3 tools/mnist_from_npm.py package/src/digits data/mnist10k
"""
import argparse
import json
import random
import struct
from pathlib import Path


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("digits_dir", type=Path)
    ap.add_argument("out_dir", type=Path)
    ap.add_argument("--seed", type=int, default=20210101)
    args = ap.parse_args()

    samples = []
    for digit in range(10):
        flat = json.loads((args.digits_dir / f"{digit}.json").read_text())["data"]
        assert len(flat) % 784 == 0
        for k in range(len(flat) // 784):
            px = bytes(min(255, max(0, round(v * 255))) for v in flat[k * 784:(k + 1) * 784])
            samples.append((px, digit))

    random.Random(args.seed).shuffle(samples)

    args.out_dir.mkdir(parents=True, exist_ok=True)
    with open(args.out_dir / "images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 2051, len(samples), 28, 28))
        for px, _ in samples:
            f.write(px)
    with open(args.out_dir / "labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 2049, len(samples)))
        f.write(bytes(label for _, label in samples))
    print(f"wrote {len(samples)} samples to {args.out_dir}")


if __name__ == "__main__":
    main()
