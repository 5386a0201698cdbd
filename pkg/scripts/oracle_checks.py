"""Lattice-oracle comparisons and the mode-count refinement study, as JSON."""
import argparse
import json
from pathlib import Path

from fewphoton.model import GaussianPacket, SystemParams
from fewphoton.oracle import LatticeConfig, refinement_study, scatter_and_compare

if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="results")
    a = ap.parse_args()
    Path(a.out).mkdir(exist_ok=True)
    pkt = GaussianPacket()
    runs = {
        "n1_V0.2": (1, 0.2, LatticeConfig(photon_cutoff=1, k_halfwidth=9 * pkt.delta)),
        "n1_V0.5": (1, 0.5, LatticeConfig(photon_cutoff=1)),
        "n2_V0.4": (2, 0.4, LatticeConfig(photon_cutoff=2)),
    }
    out = {}
    for name, (n, v, cfg) in runs.items():
        out[name] = json.loads(scatter_and_compare(n, pkt, SystemParams(coupling_v=v), cfg).to_json())
        print(name, out[name]["rms_deviation"], out[name]["bound_l2_error"])
    out["refinement_rms"] = refinement_study(pkt, SystemParams(coupling_v=0.5))
    print("refinement", out["refinement_rms"])
    Path(f"{a.out}/oracle.json").write_text(json.dumps(out, indent=2, sort_keys=True) + "\n")
