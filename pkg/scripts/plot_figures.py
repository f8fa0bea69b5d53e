#!/usr/bin/env python3
"""Render the CSV bundle from `scoreforge figures` as PNGs.

Optional helper; matplotlib is not a dependency of the package itself.

    scoreforge figures --out-dir figures
    python scripts/plot_figures.py figures
"""

import csv
import pathlib
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    header, data = rows[0], rows[1:]
    cols = {name: [float(r[i]) for r in data] for i, name in enumerate(header)}
    return cols


def main(out_dir="figures"):
    out = pathlib.Path(out_dir)

    fig, axes = plt.subplots(2, 2, figsize=(9, 7), sharex=True, sharey=True)
    panels = [("static_N5", "single stage, N=5"), ("static_N10", "single stage, N=10"),
              ("adaptive_N5", "adaptive, N=5"), ("adaptive_N10", "adaptive, N=10")]
    for ax, (name, title) in zip(axes.ravel(), panels):
        cols = read_csv(out / f"figure2_{name}.csv")
        ax.plot(cols["theta"], cols["H"], lw=1.5)
        ax.set_title(title)
        ax.set_xlabel("theta")
        ax.set_ylabel("H")
    fig.suptitle("Optimal bounded rules for conjugate binary families")
    fig.tight_layout()
    fig.savefig(out / "figure2.png", dpi=150)

    fig, axes = plt.subplots(1, 3, figsize=(12, 3.5))
    for ax, n in zip(axes[:2], (10, 20)):
        cols = read_csv(out / f"figure3_N{n}.csv")
        ax.plot(cols["theta"], cols["H_opt"], label="optimal", lw=1.5)
        ax.plot(cols["theta"], cols["H_log"], label="log rule", ls="--")
        ax.set_title(f"N={n}")
        ax.set_xlabel("theta")
        ax.legend()
    cols = read_csv(out / "figure3_diff.csv")
    axes[2].plot(cols["N"], cols["max_abs_diff"], marker="o")
    axes[2].set_title("sup |optimal - log| (common region)")
    axes[2].set_xlabel("N")
    fig.tight_layout()
    fig.savefig(out / "figure3.png", dpi=150)
    print(f"wrote {out / 'figure2.png'} and {out / 'figure3.png'}")


if __name__ == "__main__":
    main(*sys.argv[1:])
