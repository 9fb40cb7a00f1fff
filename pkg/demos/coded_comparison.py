"""Layered receiver versus flat baselines over the coded 2x2 link.

Runs short sweeps of the layered MMSE-then-ML receiver (unequal rates
on the two layers) against single-stream 16-QAM with exhaustive ML and
with linear MMSE, then prints frame error rates beside the shipped
long-run reference curves.
"""

import argparse
import importlib.resources

from hqmimo import cli, sim

parser = argparse.ArgumentParser()
parser.add_argument("--max-frames", type=int, default=1500,
                    help="per-point frame cap (default keeps this quick)")
args = parser.parse_args()


def ref(fig, layer):
    rows = cli.load_csv(
        str(importlib.resources.files("hqmimo.reference").joinpath(f"{fig}.csv"))
    )
    return {r["ebn0_db"]: r["fer"] for r in rows if r["layer"] == layer}


def short_sweep(ebn0, **kw):
    cfg = sim.SimConfig(
        nt=2, nr=2, ebn0_db=tuple(float(x) for x in ebn0),
        max_frames=args.max_frames, **kw,
    )
    return sim.run_sweep(cfg)


print("Layered, ratio 1.9, rates 2/3 (base) and 5/6 (enhancement):")
rows = short_sweep(
    range(6, 11), modulation="hqam16", detector="mmse_ml",
    rates=("2/3", "5/6"), ratios=(1.9,),
)
base_ref, enh_ref = ref("fig4", "base"), ref("fig4", "enh1")
print(f"{'Eb/N0':>6} {'base FER':>9} {'ref':>8} {'enh FER':>9} {'ref':>8}")
for db in range(6, 11):
    by = {r.layer: r.fer for r in rows if r.ebn0_db == db}
    print(
        f"{db:6d} {by['base']:9.4f} {base_ref[db]:8.4f}"
        f" {by['enh1']:9.4f} {enh_ref[db]:8.4f}"
    )

print()
print("Flat 16-QAM baselines at overall rate 3/4:")
ml_rows = short_sweep(
    range(6, 11), modulation="qam16", detector="ml", rates=("3/4",)
)
mmse_rows = short_sweep(
    range(9, 14), modulation="qam16", detector="mmse", rates=("3/4",)
)
ml_ref, mmse_ref = ref("fig4", "single_ml"), ref("fig4", "single_mmse")
print(f"{'Eb/N0':>6} {'ML FER':>9} {'ref':>8}     {'Eb/N0':>6} {'MMSE FER':>9} {'ref':>8}")
for db_ml, db_mm in zip(range(6, 11), range(9, 14)):
    ml = next(r.fer for r in ml_rows if r.ebn0_db == db_ml and r.layer == "single")
    mm = next(r.fer for r in mmse_rows if r.ebn0_db == db_mm and r.layer == "single")
    print(
        f"{db_ml:6d} {ml:9.4f} {ml_ref[db_ml]:8.4f}"
        f"     {db_mm:6d} {mm:9.4f} {mmse_ref[db_mm]:8.4f}"
    )

print()
print("The layered receiver tracks the exhaustive-ML baseline to within")
print("about a dB while doing two small searches instead of one big one;")
print("the linear baseline needs several extra dB for the same FER.")
print("Frame caps this small leave visible Monte Carlo wiggle; raise")
print("--max-frames to tighten the deep points.")
