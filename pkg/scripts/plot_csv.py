"""Quick-look plot for any two-column CSV produced by the cespdc CLI.

    python3 scripts/plot_csv.py runs/jsi/jsi.csv [out.png] [--log]
"""

from __future__ import annotations

import csv
import sys


def main(argv):
    if not argv or argv[0] in ("-h", "--help"):
        print(__doc__)
        return 0
    path = argv[0]
    out = argv[1] if len(argv) > 1 and not argv[1].startswith("--") else None
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader]
    x = [float(r[0]) for r in rows]
    ys = [[float(r[c]) for r in rows] for c in range(1, len(header))]

    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(8, 4.5))
    for label, y in zip(header[1:], ys):
        ax.plot(x, y, lw=0.9, label=label)
    ax.set_xlabel(header[0])
    if "--log" in argv:
        ax.set_yscale("log")
    if len(header) > 2:
        ax.legend()
    fig.tight_layout()
    target = out or path.rsplit(".", 1)[0] + ".png"
    fig.savefig(target, dpi=150)
    print(target)
    return 0


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
