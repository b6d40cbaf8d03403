#!/usr/bin/env python3
"""Plot TV-distance curves written by `bl tv-curve` and `bl bounds`.

    bl tv-curve --n1 100 --n2 100 --nw 100 --m-max 1000 > tv.csv
    bl bounds --n1 100 --n2 100 --nw 100 --kind upper --c 0,0.5,1,1.5,2,2.5,3 --measure > upper.csv
    python3 scripts/plot_tv.py tv.csv --bounds upper.csv -o tv.png

Without --bounds this draws the exact curve only. With it, the bound
A*exp(-2c) and the measured E_pi[TV] are drawn at each step count of the grid.
"""

import argparse
import csv

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def parse_number(text):
    if "/" in text:
        num, den = text.split("/")
        return int(num) / int(den)
    return float(text)


def read_columns(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return {key: [parse_number(r[key]) for r in rows] for key in rows[0]}


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("curve", help="CSV from `bl tv-curve`")
    parser.add_argument("--bounds", help="CSV from `bl bounds --kind upper --measure`")
    parser.add_argument("--log", action="store_true", help="logarithmic TV axis")
    parser.add_argument("-o", "--output", default="tv_curve.png")
    args = parser.parse_args()

    curve = read_columns(args.curve)
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(curve["m"], curve["tv"], color="black", lw=1.2, label="exact TV from state 0")
    if args.bounds:
        bounds = read_columns(args.bounds)
        ax.plot(bounds["m"], bounds["bound"], "o--", color="tab:red", label="upper bound, A = 1")
        if "measured" in bounds:
            ax.plot(bounds["m"], bounds["measured"], "s", color="tab:blue", label="exact E_pi[TV]")
    if args.log:
        ax.set_yscale("log")
    ax.set_xlabel("m (swaps)")
    ax.set_ylabel("total variation distance")
    ax.legend()
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(args.output, dpi=150)


if __name__ == "__main__":
    main()
