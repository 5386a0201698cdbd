"""Transmitted g2 curves at six couplings around the antibunching optimum (Gamma' = 0.1)."""
import argparse
from pathlib import Path

from fewphoton.cli import main

COUPLINGS = (0.16, 0.26, 0.34, 0.38, 0.40, 0.45)

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    ap.add_argument("--nbar", default="1.0")
    a = ap.parse_args()
    Path(a.out).mkdir(exist_ok=True)
    for v in COUPLINGS:
        code = main(["g2", "--v", str(v), "--gamma-prime", "0.1", "--nbar", a.nbar, "--points", "200",
                     "--gamma-x-max", "20", "--out", f"{a.out}/g2_V{v:.2f}.csv"])
        print(f"V={v}: exit {code}")
