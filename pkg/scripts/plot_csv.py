"""Plot the CSVs written by the other scripts (needs matplotlib: pip install .[plot])."""
import argparse
import csv
from collections import defaultdict

import matplotlib.pyplot as plt


def read(path):
    with open(path) as fh:
        return list(csv.DictReader(line for line in fh if not line.startswith("#")))


def plot_fock(path, ax):
    series = defaultdict(lambda: defaultdict(list))
    for row in read(path):
        for part in ("total", "pw", "bs"):
            series[row["sector"]][part].append((float(row["V"]), float(row[part])))
    for sector, parts in series.items():
        for part, style in (("total", "-"), ("pw", "--"), ("bs", ":")):
            v, y = zip(*parts[part])
            ax.plot(v, y, style, label=f"{sector} {part}")
    ax.set_xlabel("V")
    ax.legend(fontsize="small")


def plot_g2(paths, ax):
    for path in paths:
        rows = read(path)
        ax.plot([float(r["gamma_x"]) for r in rows], [float(r["g2"]) for r in rows], label=path)
    ax.set_xlabel("Gamma x")
    ax.set_ylabel("g2")
    ax.legend(fontsize="small")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("kind", choices=("fock", "g2"))
    ap.add_argument("paths", nargs="+")
    ap.add_argument("--save", default=None)
    a = ap.parse_args()
    fig, ax = plt.subplots()
    plot_fock(a.paths[0], ax) if a.kind == "fock" else plot_g2(a.paths, ax)
    plt.savefig(a.save) if a.save else plt.show()
