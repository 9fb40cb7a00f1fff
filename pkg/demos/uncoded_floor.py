"""Error floors of the hard two-stage detector without coding.

The stage-1 searcher treats the enhancement layer as noise, so its
decisions stop improving once that interference dominates thermal
noise.  A short Monte Carlo run shows the floors forming; the shipped
reference table holds the long-run values.
"""

import argparse
import importlib.resources

import numpy as np

from hqmimo import cli, sim

parser = argparse.ArgumentParser()
parser.add_argument("--bits", type=int, default=300_000,
                    help="minimum payload bits per point (default quick)")
args = parser.parse_args()

ref_rows = cli.load_csv(
    str(importlib.resources.files("hqmimo.reference").joinpath("fig2.csv"))
)
ref = {(r["layer"], r["ebn0_db"]): r["ber"] for r in ref_rows}

for d in (4.0, 8.0):
    cfg = sim.SimConfig(
        nt=2, nr=2, modulation="hqam16", detector="ml_ml_uncoded",
        coding="none", fading="per_vector_iid", ratios=(d,),
        ebn0_db=(10.0, 20.0, 30.0, 35.0), min_bits=args.bits,
    )
    tag = f"d{int(d)}"
    print(f"ratio d={d:g}")
    print(f"{'Eb/N0':>6} {'base BER':>10} {'ref':>10} {'enh BER':>10} {'ref':>10}")
    for ebn0 in cfg.ebn0_db:
        rows = sim.run_point(cfg, ebn0)
        by = {r.layer: r.ber for r in rows}
        print(
            f"{ebn0:6.0f} {by['base']:10.2e} {ref[(f'base_{tag}', ebn0)]:10.2e}"
            f" {by['enh1']:10.2e} {ref[(f'enh1_{tag}', ebn0)]:10.2e}"
        )
    print()

print("Past ~20 dB the base curves go flat: the floor scales with the")
print("enhancement power, so d=8 floors two decades below d=4.  The")
print("enhancement floor rides on the base decisions: every stage-1")
print("error corrupts the cancellation, so at wide ratios it is the")
print("most sensitive number here and sits above the base floor.")
