"""Metric-evaluation counts of the split receiver versus one big search.

Joint detection of two layers on N_t antennas enumerates 16^N_t
candidate vectors.  The split receiver searches the 4-point base
alphabet per antenna after filtering, then one 4^N_t enhancement-only
search on the cleaned signal.  Counting metric evaluations per received
vector:

    full search     16^N_t  =  4^(2 N_t)
    split search    4 N_t + 4^N_t

The gap widens fast; at four antennas it is already two orders of
magnitude, and the wall-clock ratio of the two inner loops tracks the
counter ratio.
"""

import argparse

from hqmimo import cli

parser = argparse.ArgumentParser()
parser.add_argument("--repeats", type=int, default=3,
                    help="timing repetitions, best-of (default 3)")
args = parser.parse_args()

print("Analytic counts per received vector:")
print(" N_t   full 16^Nt   split 4Nt+4^Nt   ratio")
for nt in range(2, 7):
    full = 16 ** nt
    split = 4 * nt + 4 ** nt
    print(f"{nt:4d} {full:12d} {split:16d} {full / split:7.1f}x")

print()
print("Measured on this machine (batched numpy inner loops):")
rows = cli.bench_detectors(seed=0, repeats=args.repeats)
print(" N_t   counted full/split    us/vec full   us/vec split   speedup")
for r in rows:
    print(f"{r['nt']:4d} {r['measured_full']:11.0f}/{r['measured_layered']:<6.0f}"
          f" {r['us_full']:13.1f} {r['us_layered']:14.1f}"
          f" {r['speedup']:9.1f}x")

print()
print("The counters are exact, not estimates: each detector increments")
print("them inside the candidate loop, so the table above doubles as a")
print("check that the implementations enumerate what they claim to.")
print("Wall clock need not track the counters exactly: at N_t=2 the")
print("split receiver's filtering overhead eats part of the win, while")
print("at N_t=4 the 65536-candidate table stops fitting in cache and the")
print("full search slows down beyond what counting alone predicts.")
