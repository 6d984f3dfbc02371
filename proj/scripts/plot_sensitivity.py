#!/usr/bin/env python3
"""Heatmaps of mean lifetime and mAP over (radius, theta) from sensitivity.csv."""
import csv
import math
import sys


def main():
    path = sys.argv[1] if len(sys.argv) > 1 else "out/sensitivity.csv"
    rows = []
    with open(path) as f:
        for row in csv.DictReader(f):
            if row["experiment"] != "sensitivity-mean" or row["status"] != "mean":
                continue
            rows.append((float(row["radius"]), float(row["theta"]),
                         float(row["lifetime"]), float(row["weighted_mAP"])))
    if not rows:
        print("no mean rows in", path)
        return
    radii = sorted({r for r, *_ in rows})
    thetas = sorted({t for _, t, *_ in rows})
    life = [[math.nan] * len(thetas) for _ in radii]
    wmap = [[math.nan] * len(thetas) for _ in radii]
    for r, t, lf, mp in rows:
        life[radii.index(r)][thetas.index(t)] = lf
        wmap[radii.index(r)][thetas.index(t)] = mp
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; printing the lifetime grid instead")
        for i, r in enumerate(radii):
            print(r, ["%.0f" % v for v in life[i]])
        return
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for ax, grid, title in [(axes[0], life, "mean lifetime (s)"),
                            (axes[1], wmap, "mean performance (mAP)")]:
        im = ax.imshow(grid, aspect="auto", origin="lower")
        ax.set_xticks(range(len(thetas)),
                      ["%.0e" % t for t in thetas], rotation=45)
        ax.set_yticks(range(len(radii)), ["%.2f" % r for r in radii])
        ax.set_xlabel("theta")
        ax.set_ylabel("radius")
        ax.set_title(title)
        fig.colorbar(im, ax=ax)
    out = path.rsplit(".", 1)[0] + ".png"
    fig.tight_layout()
    fig.savefig(out, dpi=130)
    print("wrote", out)


if __name__ == "__main__":
    main()
