#!/usr/bin/env python3
"""Build a ccstat manifest from plain-text ground-truth triplets.

Targets the layout most benchmark mirrors can be exported to:

  --images   one image path per line (relative to the manifest or absolute)
  --truth    one illuminant per line, three whitespace- or comma-separated
             numbers, in the same order as --images
  --folds    optional, one integer fold label per line, same order
  --masks    optional, one mask path per line (empty line = no mask)

Triplets are read as R G B unless --order says otherwise. The intended
source for GreyBall is the `real_illum_11346` ground-truth matrix exported
to text (one row per image, same order as the image listing). Channel order
differs between mirrors, so check a handful of rows against images with an
obvious cast before trusting a conversion: a swapped order shows up as red
and blue trading places in the Gray-world estimates.

Ground truth is written exactly as read; no normalization is applied.
"""

import argparse
import csv
import os
import re
import sys

HEADER = ["image_id", "image_path", "mask_path", "e_R", "e_G", "e_B", "fold"]


def read_lines(path):
    with open(path, newline="") as handle:
        return [line.rstrip("\r\n") for line in handle]


def parse_triplet(line, number):
    parts = [p for p in re.split(r"[\s,;]+", line.strip()) if p]
    if len(parts) != 3:
        raise ValueError(f"truth line {number}: expected 3 numbers, got {len(parts)}")
    values = [float(p) for p in parts]
    if any(v < 0 for v in values) or all(v == 0 for v in values):
        raise ValueError(f"truth line {number}: illuminant must be nonnegative and nonzero")
    return values


def image_id_for(path, used):
    stem = os.path.splitext(path.replace("\\", "/"))[0]
    candidate = stem.replace("/", "_")
    if candidate in used:
        raise ValueError(f"duplicate image id '{candidate}'")
    used.add(candidate)
    return candidate


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--images", required=True)
    parser.add_argument("--truth", required=True)
    parser.add_argument("--folds")
    parser.add_argument("--masks")
    parser.add_argument("--order", choices=["rgb", "bgr"], default="rgb")
    parser.add_argument("--out", required=True, help="manifest CSV to write")
    args = parser.parse_args(argv)

    images = [line for line in read_lines(args.images) if line.strip()]
    truths = [parse_triplet(line, i + 1) for i, line in enumerate(read_lines(args.truth)) if line.strip()]
    if len(images) != len(truths):
        parser.error(f"{len(images)} images but {len(truths)} ground-truth rows")
    folds = [line.strip() for line in read_lines(args.folds) if line.strip()] if args.folds else [""] * len(images)
    if len(folds) != len(images):
        parser.error(f"{len(images)} images but {len(folds)} fold labels")
    masks = read_lines(args.masks)[: len(images)] if args.masks else [""] * len(images)
    masks += [""] * (len(images) - len(masks))

    used = set()
    with open(args.out, "w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(HEADER)
        for path, truth, fold, mask in zip(images, truths, folds, masks):
            r, g, b = truth if args.order == "rgb" else truth[::-1]
            writer.writerow([image_id_for(path, used), path, mask.strip(), repr(r), repr(g), repr(b), fold])
    print(f"wrote {len(images)} records to {args.out}")
    return 0


if __name__ == "__main__":
    try:
        sys.exit(main())
    except ValueError as error:
        print(f"error: {error}", file=sys.stderr)
        sys.exit(3)
