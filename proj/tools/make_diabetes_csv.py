#!/usr/bin/env python3
"""Writes the 442-row diabetes data with 64 predictors (10 baseline variables,
9 squares, 45 pairwise interactions) in the layout of the lars `x2` matrix.

Reads the raw measurements bundled with scikit-learn; exits with status 3
when they are not available, or 0 with --optional.
"""
import csv
import gzip
import itertools
import os
import sys


def bundled_dir():
    try:
        import sklearn
    except ImportError:
        return None
    return os.path.join(os.path.dirname(sklearn.__file__), "datasets", "data")


def load(path):
    with gzip.open(path, "rt") as fh:
        return [[float(v) for v in line.split()] for line in fh if line.strip()]


def standardize(rows):
    # lars builds squares and interactions from centered, scaled columns
    n = len(rows)
    cols = list(zip(*rows))
    means = [sum(c) / n for c in cols]
    sds = [(sum((v - m) ** 2 for v in c) / (n - 1)) ** 0.5 for c, m in zip(cols, means)]
    return [[(v - m) / s for v, m, s in zip(row, means, sds)] for row in rows]


def main(argv):
    optional = "--optional" in argv
    argv = [a for a in argv if a != "--optional"]
    if len(argv) != 2:
        print("usage: make_diabetes_csv.py [--optional] OUT.csv", file=sys.stderr)
        return 2
    base = bundled_dir()
    raw = base and os.path.join(base, "diabetes_data_raw.csv.gz")
    target = base and os.path.join(base, "diabetes_target.csv.gz")
    if not raw or not os.path.exists(raw) or not os.path.exists(target):
        print("diabetes data not available", file=sys.stderr)
        return 0 if optional else 3
    x = standardize(load(raw))
    y = [row[0] for row in load(target)]
    names = ["age", "sex", "bmi", "map", "tc", "ldl", "hdl", "tch", "ltg", "glu"]
    squares = [j for j, name in enumerate(names) if name != "sex"]
    pairs = list(itertools.combinations(range(len(names)), 2))
    header = names + [names[j] + "^2" for j in squares] + [names[a] + ":" + names[b] for a, b in pairs] + ["y"]
    with open(argv[1], "w", newline="") as fh:
        out = csv.writer(fh)
        out.writerow(header)
        for row, resp in zip(x, y):
            values = row + [row[j] ** 2 for j in squares] + [row[a] * row[b] for a, b in pairs] + [resp]
            out.writerow(repr(v) for v in values)
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv))
