#!/usr/bin/env python3
"""Writes the bundled synthetic datasets used by the injected-signal check.

Also writes the two-blob fixture (blobs.csv, 100 rows) next to the output
directory.

The label depends mostly on HNII/HNOI. Static NII/NOI are noisy, coarse copies
of the hybrid counts, so the S columns carry only part of the signal.

    tools/make_synthetic.py [--rows 600] [--seed 20] [--out tests/fixtures/synthetic]
"""

import argparse
import csv
import math
import random
from pathlib import Path

STATIC = ["LOC", "LLOC", "NOS", "McCC", "NL", "CD", "CLOC", "DLOC", "NII", "NOI"]
VARIANTS = {
    "s": STATIC,
    "h": STATIC[:8] + ["HNII", "HNOI"],
    "s+h": STATIC + ["HNII", "HNOI"],
}


def poisson(rng, lam):
    limit, k, p = math.exp(-lam), 0, 1.0
    while True:
        p *= rng.random()
        if p <= limit:
            return k
        k += 1


def make_row(rng):
    loc = 3 + poisson(rng, 18)
    lloc = max(1, round(loc * rng.uniform(0.6, 0.95)))
    nos = max(1, round(lloc * rng.uniform(0.5, 0.9)))
    mccc = 1 + poisson(rng, 1 + lloc / 12)
    nl = min(6, poisson(rng, mccc / 3))
    cloc = poisson(rng, 2)
    cd = round(cloc / (cloc + lloc), 4)
    dloc = poisson(rng, 0.5)
    hnii = poisson(rng, 4)
    hnoi = poisson(rng, 3)
    # Static counts miss dynamic edges and see only half the callers.
    nii = max(0, hnii // 2 + rng.choice([-1, 0, 0, 1, 2]))
    noi = max(0, hnoi // 2 + rng.choice([-1, 0, 1]))
    score = 0.9 * (hnii - 4) + 0.35 * (hnoi - 3) + 0.12 * (mccc - 3) + rng.gauss(0, 0.9)
    label = 1 if score > 1.0 else 0
    values = dict(LOC=loc, LLOC=lloc, NOS=nos, McCC=mccc, NL=nl, CD=cd, CLOC=cloc, DLOC=dloc,
                  NII=nii, NOI=noi, HNII=hnii, HNOI=hnoi)
    return values, label


def write_blobs(path, rng, per_class=50):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["x1", "x2", "x3", "label"])
        for label, centre in ((0, -2.0), (1, 2.0)):
            for _ in range(per_class):
                writer.writerow([round(rng.gauss(centre, 0.6), 4) for _ in range(3)] + [label])


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--rows", type=int, default=600)
    parser.add_argument("--seed", type=int, default=20)
    parser.add_argument("--out", type=Path, default=Path("tests/fixtures/synthetic"))
    args = parser.parse_args()

    rng = random.Random(args.seed)
    rows = [make_row(rng) for _ in range(args.rows)]
    args.out.mkdir(parents=True, exist_ok=True)
    for suffix, columns in VARIANTS.items():
        with open(args.out / f"0_00_{suffix}.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(columns + ["label"])
            for values, label in rows:
                writer.writerow([values[c] for c in columns] + [label])
    write_blobs(args.out.parent / "blobs.csv", random.Random(args.seed + 1))
    positives = sum(label for _, label in rows)
    print(f"{args.rows} rows, {positives} buggy")


if __name__ == "__main__":
    main()
