"""Fock-state probability sweeps over the coupling V (one, two and three photons).

Writes results/fock_n{1,2,3}.csv. The three-photon sweep dominates the cost
(about half a minute per V on one core).
"""
import argparse
from pathlib import Path

from fewphoton.cli import main

GRIDS = {1: "0.02:1.0:49", 2: "0.02:1.0:49", 3: "0.05:1.0:19"}

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--n", type=int, nargs="+", default=[1, 2, 3])
    ap.add_argument("--workers", type=int, default=None)
    a = ap.parse_args()
    Path(a.out).mkdir(exist_ok=True)
    for n in a.n:
        argv = ["fock", "--n", str(n), "--v", GRIDS[n], "--out", f"{a.out}/fock_n{n}.csv"]
        if a.workers:
            argv += ["--workers", str(a.workers)]
        print(f"n={n}: exit {main(argv)}")
