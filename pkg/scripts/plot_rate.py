"""Plot log E_T against log kappa from a rate.dat file, with a slope-1/2 guide.

Needs matplotlib (the optional ``plot`` extra).
"""
import argparse
import math

import numpy as np


def read_blocks(path):
    blocks, label, rows = [], None, []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("#"):
                label = line.lstrip("# ").split(":")[0]
            elif line:
                rows.append([float(x) for x in line.split()])
            elif rows:
                blocks.append((label, np.array(rows)))
                rows = []
    if rows:
        blocks.append((label, np.array(rows)))
    return blocks


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("data")
    ap.add_argument("--out", default="rate.png")
    args = ap.parse_args(argv)

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 4))
    for label, d in read_blocks(args.data):
        ax.plot(d[:, 0], d[:, 1], "o-", label=label)
    d = np.vstack([b for _, b in read_blocks(args.data)])
    x = np.array([d[:, 0].min(), d[:, 0].max()])
    anchor = d[np.argmax(d[:, 0]), 1]
    ax.plot(x, anchor + 0.5 * (x - x.max()), "k--", lw=1, label="slope 1/2")
    ax.set_xlabel(r"$\log\kappa$")
    ax.set_ylabel(r"$\log E(T)$")
    ax.legend()
    fig.tight_layout()
    fig.savefig(args.out, dpi=150)
    print(f"wrote {args.out} ({len(d)} points, span {math.exp(x.max() - x.min()):.0f}x in kappa)")


if __name__ == "__main__":
    main()
