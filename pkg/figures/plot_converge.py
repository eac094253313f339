#!/usr/bin/env python3
"""Render the vanishing-epsilon error study as a log-log plot.

Usage: plot_converge.py <in.csv> <out.png>

The input must carry the header eps,sup_error (the `converge` subcommand
layout). Markers at each measured point, connected by a line. Plotting is a
pure read; the input is never touched.
"""

import argparse
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_table(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
    except OSError as exc:
        sys.exit(f"error: cannot read {path}: {exc}")
    if not lines:
        sys.exit(f"error: {path} is empty")
    header = lines[0].split(",")
    expected = ["eps", "sup_error"]
    if header != expected:
        for i, (got, want) in enumerate(zip(header, expected)):
            if got != want:
                sys.exit(f"error: {path} header column {i + 1}: "
                         f"expected {want!r}, got {got!r}")
        sys.exit(f"error: {path} header has {len(header)} columns, expected 2")
    eps, err = [], []
    for k, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != 2:
            sys.exit(f"error: {path} line {k}: {len(cells)} cells")
        try:
            e, s = float(cells[0]), float(cells[1])
        except ValueError:
            sys.exit(f"error: {path} line {k}: non-numeric cell")
        if e <= 0 or s <= 0:
            sys.exit(f"error: {path} line {k}: log-log needs positive values")
        eps.append(e)
        err.append(s)
    if not eps:
        sys.exit(f"error: {path} has no data rows")
    return eps, err


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("input")
    ap.add_argument("out")
    args = ap.parse_args()

    eps, err = read_table(args.input)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(eps, err, marker="o")
    ax.set_xlabel("eps")
    ax.set_ylabel("sup error")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out} ({len(eps)} points)")


if __name__ == "__main__":
    main()
