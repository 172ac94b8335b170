#!/usr/bin/env python3
"""Build the bundled MNIST subset (digits 0, 1, 2) as standard IDX files.

Source: the `mnist` npm package (cazala/mnist, MIT), whose src/digits/<d>.json
files hold MNIST digits as byte/255 values rounded to three decimals.  The
original bytes are recovered exactly with round(v * 255).

    npm pack mnist && tar xzf mnist-1.1.0.tgz
    python3 tools/make_mnist_subset.py package/src/digits data/mnist-subset
"""
import json
import struct
import sys
from pathlib import Path

DIGITS = (0, 1, 2)
PER_DIGIT = 700
SIDE = 28


def main(src: Path, dst: Path) -> None:
    per_digit = {}
    for d in DIGITS:
        flat = json.loads((src / f"{d}.json").read_text())["data"]
        imgs = [flat[i * SIDE * SIDE:(i + 1) * SIDE * SIDE] for i in range(PER_DIGIT)]
        per_digit[d] = [bytes(round(v * 255) for v in img) for img in imgs]

    images, labels = [], []
    for i in range(PER_DIGIT):
        for d in DIGITS:
            images.append(per_digit[d][i])
            labels.append(d)

    dst.mkdir(parents=True, exist_ok=True)
    with open(dst / "train-images-idx3-ubyte", "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(images), SIDE, SIDE))
        for img in images:
            f.write(img)
    with open(dst / "train-labels-idx1-ubyte", "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(labels)))
        f.write(bytes(labels))


if __name__ == "__main__":
    main(Path(sys.argv[1]), Path(sys.argv[2]))
