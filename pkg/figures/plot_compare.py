#!/usr/bin/env python3
"""Render the side-by-side comparison of two Hamilton-Jacobi runs.

Usage: plot_compare.py <left.csv> <right.csv> <out.png>

Both inputs must carry the header t,x,phi (the `hj` / `compare` subcommand
layout). One curve per snapshot time, two panels with a shared y-range.
Plotting is a pure read; the inputs are never touched.
"""

import argparse
import os
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def read_series(path, expected_header):
    """Return [(t, [x...], [phi...])] in file order; abort on bad layout."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = [line.rstrip("\n") for line in fh]
    except OSError as exc:
        sys.exit(f"error: cannot read {path}: {exc}")
    if not lines:
        sys.exit(f"error: {path} is empty")
    header = lines[0].split(",")
    expected = expected_header.split(",")
    if header != expected:
        for i, (got, want) in enumerate(zip(header, expected)):
            if got != want:
                sys.exit(f"error: {path} header column {i + 1}: "
                         f"expected {want!r}, got {got!r}")
        sys.exit(f"error: {path} header has {len(header)} columns, "
                 f"expected {len(expected)}")
    rows = []
    for k, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        cells = line.split(",")
        if len(cells) != len(expected):
            sys.exit(f"error: {path} line {k}: {len(cells)} cells")
        try:
            rows.append(tuple(float(c) for c in cells))
        except ValueError:
            sys.exit(f"error: {path} line {k}: non-numeric cell")
    if not rows:
        sys.exit(f"error: {path} has no data rows")
    series = []
    for t, x, phi in rows:
        if not series or series[-1][0] != t:
            series.append((t, [], []))
        series[-1][1].append(x)
        series[-1][2].append(phi)
    return series


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    ap.add_argument("left")
    ap.add_argument("right")
    ap.add_argument("out")
    args = ap.parse_args()

    panels = [(args.left, read_series(args.left, "t,x,phi")),
              (args.right, read_series(args.right, "t,x,phi"))]
    lo = min(min(phi) for _, s in panels for _, _, phi in s)
    hi = max(max(phi) for _, s in panels for _, _, phi in s)
    margin = 0.05 * (hi - lo) or 0.5

    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharey=True)
    for ax, (path, series) in zip(axes, panels):
        for t, x, phi in series:
            ax.plot(x, phi, label=f"t = {t:g}")
        name = os.path.splitext(os.path.basename(path))[0]
        ax.set_title(name)
        ax.set_xlabel("x")
        ax.legend(fontsize="small")
    axes[0].set_ylabel("phi")
    axes[0].set_ylim(lo - margin, hi + margin)
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out} ({len(panels[0][1])} + {len(panels[1][1])} curves)")


if __name__ == "__main__":
    main()
