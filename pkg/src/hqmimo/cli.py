"""Run orchestration: config files, presets, CSV output, and the detector bench.

Configs are flat key=value text, one key per line, '#' starting a
comment.  Presets expand to complete SimConfigs for the four standard
experiment setups and are frozen; results are written in a fixed
14-column CSV schema that round-trips exactly through load_csv.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import sys
import time

import numpy as np

from . import channel, detect
from .constellation import HqamParams, build_hqam
from .sim import PointResult, SimConfig, run_sweep

CSV_HEADER = (
    "ebn0_db,layer,frames,frame_errors,fer,fer_ci_lo,fer_ci_hi,"
    "bit_errors,bits,ber,avg_iters,metric_evals,seconds,seed"
)

PRESET_NAMES = ("fig2", "fig3", "fig4", "fig5")


class ConfigError(ValueError):
    """Invalid configuration text or command line; maps to exit status 1."""


def _fmt_float(v) -> str:
    f = float(v)
    if f == int(f) and abs(f) < 1e15:
        return str(int(f))
    return repr(f)


def _parse_int(s: str) -> int:
    try:
        return int(s, 10)
    except ValueError:
        raise ValueError(f"not an integer: {s!r}")


def _parse_float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ValueError(f"not a number: {s!r}")


def _parse_float_list(s: str) -> tuple[float, ...]:
    items = [t.strip() for t in s.split(",") if t.strip()]
    return tuple(_parse_float(t) for t in items)


def _parse_str_list(s: str) -> tuple[str, ...]:
    return tuple(t.strip() for t in s.split(",") if t.strip())


def _fmt_list(vals) -> str:
    return ",".join(_fmt_float(v) if isinstance(v, float) else str(v) for v in vals)


# key -> (value parser, value formatter); order fixes config_text output
_CONFIG_KEYS = {
    "nt": (_parse_int, str),
    "nr": (_parse_int, str),
    "modulation": (str, str),
    "detector": (str, str),
    "rates": (_parse_str_list, _fmt_list),
    "ratios": (_parse_float_list, _fmt_list),
    "coding": (str, str),
    "fading": (str, str),
    "f_blocks": (_parse_int, str),
    "ebn0_db": (_parse_float_list, _fmt_list),
    "min_frame_errors": (_parse_int, str),
    "max_frames": (_parse_int, str),
    "min_bits": (_parse_int, str),
    "master_seed": (_parse_int, str),
    "llr_mode": (str, str),
    "max_decoder_iterations": (_parse_int, str),
    "workers": (_parse_int, str),
}

_REQUIRED_KEYS = ("nt", "nr", "modulation", "detector")


def parse_config(text: str) -> SimConfig:
    """Build a validated SimConfig from key=value text.

    Unknown and duplicate keys are rejected by name; '#' comments and
    blank lines are ignored.
    """
    fields = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _CONFIG_KEYS:
            raise ConfigError(f"unknown key: {key}")
        if key in fields:
            raise ConfigError(f"duplicate key: {key}")
        parser, _ = _CONFIG_KEYS[key]
        try:
            fields[key] = parser(value)
        except ValueError as e:
            raise ConfigError(f"{key}: {e}")
    for key in _REQUIRED_KEYS:
        if key not in fields:
            raise ConfigError(f"missing required key: {key}")
    try:
        return SimConfig(**fields)
    except ValueError as e:
        raise ConfigError(str(e))


def config_text(config: SimConfig) -> str:
    """Render a SimConfig as config text; parse_config inverts exactly."""
    lines = []
    for key, (_, fmt) in _CONFIG_KEYS.items():
        lines.append(f"{key}={fmt(getattr(config, key))}")
    return "\n".join(lines) + "\n"


def preset_config(name: str) -> SimConfig:
    """One of the four frozen experiment setups."""
    if name == "fig2":
        return SimConfig(
            nt=2, nr=2, modulation="hqam16", detector="ml_ml_uncoded",
            ratios=(4.0,), coding="none", fading="per_vector_iid",
            ebn0_db=tuple(range(0, 40, 5)), min_bits=2_100_000,
        )
    if name == "fig3":
        return SimConfig(
            nt=2, nr=2, modulation="hqam16", detector="mmse_ml",
            rates=("2/3", "5/6"), ratios=(2.0,), coding="ldpc",
            fading="block_fading", f_blocks=8, ebn0_db=tuple(range(15)),
        )
    if name == "fig4":
        return SimConfig(
            nt=2, nr=2, modulation="hqam16", detector="mmse_ml",
            rates=("2/3", "5/6"), ratios=(1.9,), coding="ldpc",
            fading="block_fading", f_blocks=8, ebn0_db=tuple(range(15)),
        )
    if name == "fig5":
        return SimConfig(
            nt=4, nr=4, modulation="hqam16", detector="mmse_ml",
            rates=("2/3", "5/6"), ratios=(2.0,), coding="ldpc",
            fading="block_fading", f_blocks=8, ebn0_db=tuple(range(9)),
        )
    raise ConfigError(f"unknown preset: {name}")


def format_csv(results: list[PointResult], no_timing: bool = False) -> str:
    """Result rows in the fixed schema; decoder columns empty for uncoded."""
    lines = [CSV_HEADER]
    for r in results:
        if r.coded:
            lo, hi = r.fer_ci
            fe = str(r.frame_errors)
            fer, ci_lo, ci_hi = _fmt_float(r.fer), _fmt_float(lo), _fmt_float(hi)
            iters = _fmt_float(r.avg_iters)
        else:
            fe = fer = ci_lo = ci_hi = iters = ""
        seconds = 0.0 if no_timing else r.seconds
        lines.append(",".join([
            _fmt_float(r.ebn0_db), r.layer, str(r.frames), fe,
            fer, ci_lo, ci_hi, str(r.bit_errors), str(r.bits),
            _fmt_float(r.ber), iters, str(r.metric_evals),
            _fmt_float(seconds), str(r.seed),
        ]))
    return "\n".join(lines) + "\n"


def emit_csv(results: list[PointResult], path: str, no_timing: bool = False) -> None:
    text = format_csv(results, no_timing)
    with open(path, "w", newline="") as f:
        f.write(text)


_INT_COLUMNS = ("frames", "frame_errors", "bit_errors", "bits", "metric_evals", "seed")


def load_csv(path: str) -> list[dict]:
    """Parse a results or reference CSV back into typed row dicts.

    Numeric cells become int or float, empty cells None; the header must
    match the schema exactly.
    """
    columns = CSV_HEADER.split(",")
    with open(path, newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file, expected schema header")
        if header != columns:
            for got, want in zip(header, columns):
                if got != want:
                    raise ConfigError(
                        f"{path}: bad header column {got!r}, expected {want!r}"
                    )
            raise ConfigError(f"{path}: header has {len(header)} columns, expected {len(columns)}")
        rows = []
        for cells in reader:
            if len(cells) != len(columns):
                raise ConfigError(f"{path}: row with {len(cells)} cells")
            row = {}
            for name, cell in zip(columns, cells):
                if name == "layer":
                    row[name] = cell
                elif cell == "":
                    row[name] = None
                elif name in _INT_COLUMNS:
                    row[name] = int(cell)
                else:
                    row[name] = float(cell)
            rows.append(row)
    return rows


def _bench_labels_to_x(bits: np.ndarray, points: np.ndarray) -> np.ndarray:
    labels = (bits[..., 0].astype(np.int64) << 1) | bits[..., 1].astype(np.int64)
    return points[labels]


def bench_detectors(seed: int = 0, repeats: int = 3) -> list[dict]:
    """Per-vector cost of exhaustive joint detection vs the layered detector.

    For antenna counts 2..4, times hard-decision detection of the full
    16-point product constellation against the layered front end (MMSE
    pass over the coarse layer, cancel, joint search over the fine
    layer) and tallies Euclidean metric evaluations per vector use.
    """
    cst = build_hqam(HqamParams(2, (2.0,)))
    e_base, e_enh = (float(e) for e in cst.layer_energy)
    report = []
    for nt in (2, 3, 4):
        rng = np.random.default_rng(seed + nt)
        n0 = channel.ebn0_to_n0(10.0, 1.0, 4, nt)
        v_full = {2: 4096, 3: 512, 4: 64}[nt]
        v_layered = 4096

        hb, mp = channel.draw_channel(rng, v_full, nt, nt, "block_fading", 8)
        x = cst.points[rng.integers(0, 16, (v_full, nt))]
        y = channel.transmit(hb, mp, x, n0, rng)
        t_full = np.inf
        for _ in range(repeats):
            cnt_full = detect.ComplexityCounter()
            t0 = time.perf_counter()
            detect.hard_ml_detect(y, hb, mp, cst.points, cnt_full)
            t_full = min(t_full, time.perf_counter() - t0)

        hb, mp = channel.draw_channel(rng, v_layered, nt, nt, "block_fading", 8)
        x = cst.points[rng.integers(0, 16, (v_layered, nt))]
        y = channel.transmit(hb, mp, x, n0, rng)
        t_layered = np.inf
        for _ in range(repeats):
            cnt_layered = detect.ComplexityCounter()
            t0 = time.perf_counter()
            stats = detect.mmse_stage(hb, n0, e_base, e_enh, cnt_layered)
            z = detect.mmse_apply(stats, mp, y)
            llr = detect.scalar_llrs(
                z, stats.beta[mp], stats.sigma2[mp], cst.layer_centroids[0],
                max_log=True, counter=cnt_layered,
            )
            x_base = _bench_labels_to_x(llr < 0, cst.layer_centroids[0])
            y_rem = detect.cancel(y, hb, mp, x_base)
            detect.hard_ml_detect(y_rem, hb, mp, cst.layer_centroids[1], cnt_layered)
            t_layered = min(t_layered, time.perf_counter() - t0)

        us_full = t_full / v_full * 1e6
        us_layered = t_layered / v_layered * 1e6
        report.append({
            "nt": nt,
            "analytic_full": 4 ** (2 * nt),
            "analytic_layered": 4 * nt + 4 ** nt,
            "measured_full": cnt_full.metric_evaluations / v_full,
            "measured_layered": cnt_layered.metric_evaluations / v_layered,
            "us_full": us_full,
            "us_layered": us_layered,
            "speedup": us_full / us_layered,
        })
    return report


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hqmimo", description="Layered-modulation MIMO link simulator")
    sub = p.add_subparsers(dest="verb", required=True)

    run = sub.add_parser("run", help="simulate a sweep and write a results CSV")
    run.add_argument("--config", help="key=value config file")
    run.add_argument("--preset", help="named setup: " + ", ".join(PRESET_NAMES))
    run.add_argument("--out", required=True, help="output CSV path")
    run.add_argument("--seed", type=int, help="override master_seed")
    run.add_argument("--workers", type=int, help="override worker count")
    run.add_argument(
        "--no-timing", action="store_true",
        help="write zero wall seconds for byte-stable output",
    )

    bench = sub.add_parser("bench", help="detector complexity comparison")
    bench.add_argument("--seed", type=int, default=0)

    show = sub.add_parser("show-config", help="print the expanded configuration")
    show.add_argument("--config", help="key=value config file")
    show.add_argument("--preset", help="named setup: " + ", ".join(PRESET_NAMES))
    return p


def _resolve_config(args) -> SimConfig:
    if bool(args.config) == bool(args.preset):
        raise ConfigError("exactly one of --config or --preset is required")
    if args.preset:
        return preset_config(args.preset)
    with open(args.config) as f:
        return parse_config(f.read())


def _cmd_run(args) -> int:
    config = _resolve_config(args)
    overrides = {}
    if args.seed is not None:
        overrides["master_seed"] = args.seed
    if args.workers is not None:
        overrides["workers"] = args.workers
    if overrides:
        try:
            config = dataclasses.replace(config, **overrides)
        except ValueError as e:
            raise ConfigError(str(e))
    # claim the output path before burning simulation time on it
    with open(args.out, "w", newline="") as f:
        results = run_sweep(config)
        f.write(format_csv(results, no_timing=args.no_timing))
    return 0


def _cmd_bench(args) -> int:
    rows = bench_detectors(seed=args.seed)
    print("nt  evals/vec full  evals/vec layered  us/vec full  us/vec layered  speedup")
    for r in rows:
        print(
            f"{r['nt']:<4d}{r['analytic_full']:<16d}{r['analytic_layered']:<19d}"
            f"{r['us_full']:<13.1f}{r['us_layered']:<16.2f}{r['speedup']:.1f}x"
        )
        if r["measured_full"] != r["analytic_full"]:
            print(f"    measured full count {r['measured_full']:.1f} differs")
        if r["measured_layered"] != r["analytic_layered"]:
            print(f"    measured layered count {r['measured_layered']:.1f} differs")
    return 0


def _cmd_show(args) -> int:
    config = _resolve_config(args)
    sys.stdout.write(config_text(config))
    return 0


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    try:
        if args.verb == "run":
            return _cmd_run(args)
        if args.verb == "bench":
            return _cmd_bench(args)
        return _cmd_show(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
