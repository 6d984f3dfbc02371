#!/usr/bin/env python3
"""Lifetime bars per policy from the comparison sweep output."""
import csv
import statistics
import sys


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "out/compare.csv"
    lives = {}
    with open(path) as f:
        for row in csv.DictReader(f):
            if row["experiment"] != "compare" or row["status"] != "optimal":
                continue
            if row["policy"] in ("mlia", "min-energy", "max-flow"):
                lives.setdefault(row["policy"], []).append(float(row["lifetime"]))
    if not lives:
        print("no comparison rows in", path)
        return
    for policy, values in sorted(lives.items()):
        print("%-11s n=%-3d median lifetime %.0f slots"
              % (policy, len(values), statistics.median(values)))
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        return
    fig, ax = plt.subplots(figsize=(5, 4))
    names = sorted(lives)
    ax.bar(names, [statistics.median(lives[n]) for n in names])
    ax.set_ylabel("median lifetime (slots)")
    out = path.rsplit(".", 1)[0] + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print("wrote", out)


if __name__ == "__main__":
    main()
