#!/usr/bin/env python3
"""Gap/congestion series per step size from the convergence sweep output."""
import csv
import glob
import sys


def main():
    metrics = sys.argv[1] if len(sys.argv) > 1 else "out/convergence_metrics.csv"
    out_dir = sys.argv[2] if len(sys.argv) > 2 else "out"
    try:
        import matplotlib
        matplotlib.use("Agg")
        import matplotlib.pyplot as plt
    except ImportError:
        print("matplotlib not available; summary only")
        with open(metrics) as f:
            for row in csv.DictReader(f):
                print(row["seed"], row["alpha"], "life", row["lifetime_slots"],
                      "steady", row["steady_gap"], "transient",
                      row["transient_slots"])
        return
    fig, axes = plt.subplots(1, 2, figsize=(11, 4))
    for series in sorted(glob.glob(out_dir + "/convergence_series_*.csv")):
        slots, gap, cong = [], [], []
        with open(series) as f:
            for row in csv.DictReader(f):
                slots.append(int(row["slot"]))
                gap.append(float(row["gap_norm"]))
                cong.append(float(row["congestion"]))
        label = series.split("convergence_series_")[1].removesuffix(".csv")
        axes[0].plot(slots, gap, label=label, linewidth=0.8)
        axes[1].plot(slots, cong, label=label, linewidth=0.8)
    axes[0].set_title("normalized optimality gap")
    axes[1].set_title("congestion (sum of multipliers)")
    for ax in axes:
        ax.set_xlabel("time slots")
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_dir + "/convergence.png", dpi=130)
    print("wrote", out_dir + "/convergence.png")


if __name__ == "__main__":
    main()
