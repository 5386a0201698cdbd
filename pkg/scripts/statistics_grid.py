"""Transmitted photon-number distribution against Poisson, on a (V, nbar) grid."""
import argparse
from pathlib import Path

from fewphoton.cli import main

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--v", default="0.2,0.4,0.8")
    ap.add_argument("--nbar", default="0.2:1.0:4")
    ap.add_argument("--reference", choices=("transmitted", "incident"), default="transmitted")
    a = ap.parse_args()
    Path(a.out).mkdir(exist_ok=True)
    path = f"{a.out}/stats_{a.reference}.csv"
    print(main(["stats", "--v", a.v, "--nbar", a.nbar, "--reference", a.reference, "--out", path]))
