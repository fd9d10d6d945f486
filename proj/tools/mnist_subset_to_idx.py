#!/usr/bin/env python3
"""Convert a CSV of MNIST digits (784 pixel columns then the label) to IDX files.

The 5,000-image subset shipped with mlxtend (mlxtend/data/data/mnist_5k.csv.gz)
has that layout. The source may be the .csv.gz itself or a wheel containing it.

    python3 tools/mnist_subset_to_idx.py mlxtend-0.24.0-py3-none-any.whl data/mnist-5k
"""

import argparse
import gzip
import io
import pathlib
import struct
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


def read_rows(source: pathlib.Path):
    if source.suffix == ".whl":
        with zipfile.ZipFile(source) as wheel:
            raw = wheel.read(MEMBER)
    else:
        raw = source.read_bytes()
    text = gzip.decompress(raw).decode("ascii")
    rows = []
    for line in io.StringIO(text):
        line = line.strip()
        if not line:
            continue
        values = [int(float(v)) for v in line.split(",")]
        if len(values) != 785:
            raise ValueError(f"expected 785 columns, got {len(values)}")
        rows.append(values)
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("source", type=pathlib.Path)
    parser.add_argument("out_dir", type=pathlib.Path)
    args = parser.parse_args()

    rows = read_rows(args.source)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    images = bytearray(struct.pack(">IIII", 2051, len(rows), 28, 28))
    labels = bytearray(struct.pack(">II", 2049, len(rows)))
    for row in rows:
        images.extend(bytes(row[:784]))
        labels.append(row[784])
    (args.out_dir / "images-idx3-ubyte").write_bytes(bytes(images))
    (args.out_dir / "labels-idx1-ubyte").write_bytes(bytes(labels))
    print(f"wrote {len(rows)} images to {args.out_dir}")


if __name__ == "__main__":
    main()
