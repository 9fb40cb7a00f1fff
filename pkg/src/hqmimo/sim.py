"""Monte Carlo engine: frame assembly, stopping rules, and statistics.

A frame is 576 constellation symbols (2304 coded bits at 4 bits/symbol).
Frames are simulated in fixed-size chunks with per-frame RNG substreams
keyed by (master_seed, frame_index), and chunk results are merged in
frame order, so error counts and stopping decisions are identical for
any worker count.
"""

from __future__ import annotations

import functools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import channel, detect, receivers, wimax_ldpc
from .constellation import (
    HqamParams,
    LayeredConstellation,
    build_hqam,
    labels_to_bits,
    standard_qam16,
)

CHUNK_FRAMES = 25

RATE_IDS = {"1/2": "1/2", "2/3": "2/3A", "3/4": "3/4A", "5/6": "5/6"}
RATE_VALUES = {"1/2": 1 / 2, "2/3": 2 / 3, "3/4": 3 / 4, "5/6": 5 / 6}

MODULATIONS = ("qam16", "hqam16", "hqam64")
DETECTORS = ("ml", "mmse", "mmse_ml", "ml_ml_uncoded", "multi_stage")

_LAYER_NAMES = {
    "qam16": ("single",),
    "hqam16": ("base", "enh1"),
    "hqam64": ("base", "enh1", "enh2"),
}


def singleton_diversity_bound(f: int, r: float) -> int:
    """Diversity order limit floor(F(1-R)) + 1 for rate R over F blocks."""
    if f < 1 or not 0 < r <= 1:
        raise ValueError("need f >= 1 and 0 < r <= 1")
    return int(np.floor(f * (1.0 - r))) + 1


def wilson_interval(k: int, n: int, z: float = 1.959964) -> tuple[float, float]:
    """95% Wilson score interval for k successes out of n."""
    if n == 0:
        return 0.0, 1.0
    p = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = p + z2 / (2 * n)
    half = z * np.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n))
    return (center - half) / denom, (center + half) / denom


@dataclass(frozen=True)
class SimConfig:
    """One simulation run: system geometry, transmitter, receiver, budget."""

    nt: int
    nr: int
    modulation: str
    detector: str
    rates: tuple[str, ...] = ()
    ratios: tuple[float, ...] = ()
    coding: str = "ldpc"
    fading: str = "block_fading"
    f_blocks: int = 8
    ebn0_db: tuple[float, ...] = ()
    min_frame_errors: int = 100
    max_frames: int | None = None
    min_bits: int = 0
    master_seed: int = 1
    llr_mode: str = "exact"
    max_decoder_iterations: int = 50
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "rates", tuple(str(r) for r in self.rates))
        object.__setattr__(self, "ratios", tuple(float(r) for r in self.ratios))
        object.__setattr__(self, "ebn0_db", tuple(float(e) for e in self.ebn0_db))
        if self.max_frames is None:
            cap = 2_000_000 if self.coding == "none" else 100_000
            object.__setattr__(self, "max_frames", cap)
        self._validate()

    def _validate(self):
        if self.modulation not in MODULATIONS:
            raise ValueError(f"modulation: unknown value {self.modulation!r}")
        if self.detector not in DETECTORS:
            raise ValueError(f"detector: unknown value {self.detector!r}")
        if self.coding not in ("none", "ldpc"):
            raise ValueError(f"coding: unknown value {self.coding!r}")
        if self.fading not in channel.FADING_MODES:
            raise ValueError(f"fading: unknown value {self.fading!r}")
        if self.nt < 1:
            raise ValueError("nt: must be >= 1")
        if self.nt > self.nr:
            raise ValueError("nr: N_t <= N_r required")
        if receivers.SYMBOLS_PER_FRAME % self.nt:
            raise ValueError(f"nt: must divide {receivers.SYMBOLS_PER_FRAME}")
        v = receivers.SYMBOLS_PER_FRAME // self.nt
        if self.fading == "block_fading":
            if self.f_blocks < 1 or v % self.f_blocks:
                raise ValueError(
                    f"f_blocks: must divide the {v} vectors per frame"
                )
        want_layers = self.layers
        if len(self.ratios) != max(want_layers - 1, 0):
            raise ValueError(
                f"ratios: expected {max(want_layers - 1, 0)} values for "
                f"{self.modulation}"
            )
        compat = {
            "qam16": ("ml", "mmse"),
            "hqam16": ("mmse_ml", "multi_stage", "ml_ml_uncoded"),
            "hqam64": ("multi_stage",),
        }
        if self.detector not in compat[self.modulation]:
            raise ValueError(
                f"detector: {self.detector} not valid for {self.modulation}"
            )
        if self.coding == "none":
            if self.detector != "ml_ml_uncoded":
                raise ValueError("coding: none requires detector ml_ml_uncoded")
            if self.rates:
                raise ValueError("rates: must be empty when coding is none")
        else:
            if self.detector == "ml_ml_uncoded":
                raise ValueError("detector: ml_ml_uncoded requires coding none")
            if len(self.rates) != want_layers:
                raise ValueError(
                    f"rates: expected {want_layers} values for {self.modulation}"
                )
            for r in self.rates:
                if r not in RATE_IDS:
                    raise ValueError(
                        f"rates: unknown rate {r!r}; choose from {sorted(RATE_IDS)}"
                    )
        for name, lo in (
            ("min_frame_errors", 1),
            ("max_frames", 1),
            ("workers", 1),
            ("master_seed", 0),
            ("min_bits", 0),
            ("max_decoder_iterations", 0),
        ):
            if getattr(self, name) < lo:
                raise ValueError(f"{name}: must be >= {lo}")
        if self.llr_mode not in ("exact", "maxlog"):
            raise ValueError(f"llr_mode: unknown value {self.llr_mode!r}")
        if not all(np.isfinite(self.ebn0_db)):
            raise ValueError("ebn0_db: values must be finite")

    @property
    def layers(self) -> int:
        return {"qam16": 1, "hqam16": 2, "hqam64": 3}[self.modulation]

    @property
    def layer_names(self) -> tuple[str, ...]:
        return _LAYER_NAMES[self.modulation]

    @property
    def bits_per_symbol(self) -> int:
        return 4 if self.modulation == "qam16" else 2 * self.layers

    @property
    def codeword_length(self) -> int:
        return 2304 if self.modulation == "qam16" else 1152

    @property
    def overall_rate(self) -> float:
        if self.coding == "none":
            return 1.0
        return float(np.mean([RATE_VALUES[r] for r in self.rates]))

    @property
    def vectors_per_frame(self) -> int:
        return receivers.SYMBOLS_PER_FRAME // self.nt

    def noise_variance(self, ebn0_db: float) -> float:
        return channel.ebn0_to_n0(
            ebn0_db, self.overall_rate, self.bits_per_symbol, self.nt
        )


@dataclass
class PointResult:
    """Error statistics for one (Eb/N0, layer) pair."""

    ebn0_db: float
    layer: str
    coded: bool
    frames: int = 0
    frame_errors: int = 0
    bit_errors: int = 0
    bits: int = 0
    iter_sum: int = 0
    metric_evals: int = 0
    matrix_inversions: int = 0
    seconds: float = 0.0
    seed: int = 0

    @property
    def fer(self) -> float:
        return self.frame_errors / self.frames if self.frames else 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else 0.0

    @property
    def fer_ci(self) -> tuple[float, float]:
        return wilson_interval(self.frame_errors, self.frames)

    @property
    def avg_iters(self) -> float:
        return self.iter_sum / self.frames if self.frames else 0.0


@dataclass
class _Counts:
    frames: int
    frame_errors: np.ndarray
    bit_errors: np.ndarray
    iter_sum: np.ndarray
    metric_evals: int
    matrix_inversions: int

    def add(self, other: "_Counts") -> None:
        self.frames += other.frames
        self.frame_errors += other.frame_errors
        self.bit_errors += other.bit_errors
        self.iter_sum += other.iter_sum
        self.metric_evals += other.metric_evals
        self.matrix_inversions += other.matrix_inversions


@functools.lru_cache(maxsize=None)
def _hqam_for(layers: int, ratios: tuple[float, ...]) -> LayeredConstellation:
    return build_hqam(HqamParams(layers, ratios))


@functools.lru_cache(maxsize=None)
def _codes_for(rates: tuple[str, ...], n: int) -> tuple[wimax_ldpc.QcLdpcCode, ...]:
    return tuple(wimax_ldpc.load_code(RATE_IDS[r], n) for r in rates)


def _generate_frames(
    config: SimConfig, ebn0_db: float, start: int, count: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, list[np.ndarray], float]:
    """Draw channels, bits, and noise for frames [start, start+count).

    Per frame the draw order is frozen: channel blocks, then each layer's
    info bits, then the additive noise.  Returns stacked (y, h_blocks,
    mapping) plus the per-layer info bit matrices and n0.
    """
    n0 = config.noise_variance(ebn0_db)
    v = config.vectors_per_frame
    rngs, h_list, local_maps = [], [], []
    if config.coding == "none":
        k_per_layer = [2 * receivers.SYMBOLS_PER_FRAME] * config.layers
    else:
        codes = _codes_for(config.rates, config.codeword_length)
        k_per_layer = [c.k for c in codes]
    infos = [np.empty((count, k), dtype=np.uint8) for k in k_per_layer]
    for j in range(count):
        rng = channel.frame_rng(config.master_seed, start + j)
        h_blocks, mapping = channel.draw_channel(
            rng, v, config.nr, config.nt, config.fading, config.f_blocks
        )
        for p, k in enumerate(k_per_layer):
            infos[p][j] = rng.integers(0, 2, size=k, dtype=np.uint8)
        rngs.append(rng)
        h_list.append(h_blocks)
        local_maps.append(mapping)

    # Transmit symbols: per-layer labels from (re-encoded) bit streams.
    if config.coding == "none":
        cst = _hqam_for(config.layers, config.ratios)
        x = sum(
            cst.layer_centroids[p][receivers.bits_to_labels(infos[p], 2)]
            for p in range(config.layers)
        )
    elif config.modulation == "qam16":
        cw = wimax_ldpc.encode_batch(codes[0], infos[0])
        x = standard_qam16()[receivers.bits_to_labels(cw, 4)]
    else:
        cst = _hqam_for(config.layers, config.ratios)
        x = np.zeros((count, receivers.SYMBOLS_PER_FRAME), dtype=complex)
        for p in range(config.layers):
            cw = wimax_ldpc.encode_batch(codes[p], infos[p])
            x += cst.layer_centroids[p][receivers.bits_to_labels(cw, 2)]

    y_list, global_maps = [], []
    offset = 0
    for j in range(count):
        xv = x[j].reshape(v, config.nt)
        y_list.append(channel.transmit(h_list[j], local_maps[j], xv, n0, rngs[j]))
        global_maps.append(local_maps[j] + offset)
        offset += h_list[j].shape[0]
    return (
        np.concatenate(y_list),
        np.concatenate(h_list),
        np.concatenate(global_maps),
        infos,
        n0,
    )


def _count_layer_errors(
    decoded: np.ndarray, truth: np.ndarray
) -> tuple[int, int]:
    wrong = decoded != truth
    return int(wrong.any(axis=1).sum()), int(wrong.sum())


def _chunk_counts(
    config: SimConfig, ebn0_db: float, start: int, count: int
) -> _Counts:
    """Simulate frames [start, start+count) and tally errors per layer."""
    y, h_blocks, mapping, infos, n0 = _generate_frames(
        config, ebn0_db, start, count
    )
    counter = detect.ComplexityCounter()
    opts = receivers.ReceiverOptions(
        max_log=config.llr_mode == "maxlog",
        decoder_max_iter=config.max_decoder_iterations,
    )
    n_layers = config.layers
    frame_errors = np.zeros(n_layers, dtype=np.int64)
    bit_errors = np.zeros(n_layers, dtype=np.int64)
    iter_sum = np.zeros(n_layers, dtype=np.int64)

    if config.coding == "none":
        cst = _hqam_for(config.layers, config.ratios)
        base_lab, enh_lab = receivers.ml_ml_uncoded(
            y, h_blocks, mapping, cst, counter=counter
        )
        for p, det in enumerate((base_lab, enh_lab)):
            det_bits = labels_to_bits(det.reshape(count, -1), 2)
            fe, be = _count_layer_errors(
                det_bits.reshape(count, -1), infos[p]
            )
            frame_errors[p] = fe
            bit_errors[p] = be
    else:
        codes = _codes_for(config.rates, config.codeword_length)
        if config.detector == "mmse_ml":
            cst = _hqam_for(config.layers, config.ratios)
            res = receivers.two_stage_mmse_ml(
                y, h_blocks, mapping, cst, list(codes), n0,
                frames=count, opts=opts, counter=counter,
            )
        elif config.detector == "multi_stage":
            cst = _hqam_for(config.layers, config.ratios)
            res = receivers.multi_stage(
                y, h_blocks, mapping, cst, list(codes), n0,
                frames=count, opts=opts, counter=counter,
            )
        elif config.detector == "mmse":
            res = receivers.mmse_single(
                y, h_blocks, mapping, standard_qam16(), codes[0], n0,
                frames=count, opts=opts, counter=counter,
            )
        else:
            res = receivers.ml_single(
                y, h_blocks, mapping, standard_qam16(), codes[0], n0,
                frames=count, opts=opts, counter=counter,
            )
        for p in range(n_layers):
            fe, be = _count_layer_errors(res.layer_info_bits[p], infos[p])
            frame_errors[p] = fe
            bit_errors[p] = be
            iter_sum[p] = int(res.layer_iterations[p].sum())

    return _Counts(
        frames=count,
        frame_errors=frame_errors,
        bit_errors=bit_errors,
        iter_sum=iter_sum,
        metric_evals=counter.metric_evaluations,
        matrix_inversions=counter.matrix_inversions,
    )


def _bits_per_frame(config: SimConfig) -> list[int]:
    if config.coding == "none":
        return [2 * receivers.SYMBOLS_PER_FRAME] * config.layers
    codes = _codes_for(config.rates, config.codeword_length)
    return [c.k for c in codes]


def _stop_reached(config: SimConfig, totals: _Counts) -> bool:
    if totals.frames >= config.max_frames:
        return True
    bits_done = totals.frames * min(_bits_per_frame(config))
    if bits_done < config.min_bits:
        return False
    return bool(np.all(totals.frame_errors >= config.min_frame_errors))


def run_point(
    config: SimConfig,
    ebn0_db: float,
    executor: ProcessPoolExecutor | None = None,
) -> list[PointResult]:
    """Simulate one Eb/N0 point until the stopping rule fires.

    Chunks of CHUNK_FRAMES frames are evaluated (in parallel when the
    config asks for workers) but always merged in chunk order, so the
    frame count and every statistic are worker-count independent.
    """
    t0 = time.perf_counter()
    n_layers = config.layers
    totals = _Counts(
        frames=0,
        frame_errors=np.zeros(n_layers, dtype=np.int64),
        bit_errors=np.zeros(n_layers, dtype=np.int64),
        iter_sum=np.zeros(n_layers, dtype=np.int64),
        metric_evals=0,
        matrix_inversions=0,
    )
    max_chunks = -(-config.max_frames // CHUNK_FRAMES)

    def chunk_args(idx: int) -> tuple[int, int]:
        start = idx * CHUNK_FRAMES
        return start, min(CHUNK_FRAMES, config.max_frames - start)

    if executor is None and config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            return run_point(config, ebn0_db, executor=pool)

    if executor is None:
        for idx in range(max_chunks):
            totals.add(_chunk_counts(config, ebn0_db, *chunk_args(idx)))
            if _stop_reached(config, totals):
                break
    else:
        window = 2 * config.workers
        pending: dict = {}
        next_submit = 0
        consume = 0
        stopped = False
        while consume < max_chunks and not stopped:
            while next_submit < max_chunks and len(pending) < window:
                pending[next_submit] = executor.submit(
                    _chunk_counts, config, ebn0_db, *chunk_args(next_submit)
                )
                next_submit += 1
            totals.add(pending.pop(consume).result())
            consume += 1
            stopped = _stop_reached(config, totals)
        for fut in pending.values():
            fut.cancel()

    seconds = time.perf_counter() - t0
    bits = _bits_per_frame(config)
    coded = config.coding != "none"
    rows = []
    for p, name in enumerate(config.layer_names):
        rows.append(
            PointResult(
                ebn0_db=ebn0_db,
                layer=name,
                coded=coded,
                frames=totals.frames,
                frame_errors=int(totals.frame_errors[p]),
                bit_errors=int(totals.bit_errors[p]),
                bits=totals.frames * bits[p],
                iter_sum=int(totals.iter_sum[p]),
                metric_evals=totals.metric_evals,
                matrix_inversions=totals.matrix_inversions,
                seconds=seconds,
                seed=config.master_seed,
            )
        )
    if coded and n_layers > 1:
        rows.append(
            PointResult(
                ebn0_db=ebn0_db,
                layer="overall",
                coded=True,
                frames=totals.frames * n_layers,
                frame_errors=int(totals.frame_errors.sum()),
                bit_errors=int(totals.bit_errors.sum()),
                bits=totals.frames * sum(bits),
                iter_sum=int(totals.iter_sum.sum()),
                metric_evals=totals.metric_evals,
                matrix_inversions=totals.matrix_inversions,
                seconds=seconds,
                seed=config.master_seed,
            )
        )
    return rows


def run_sweep(config: SimConfig) -> list[PointResult]:
    """run_point across the configured Eb/N0 list, reusing one worker pool."""
    rows: list[PointResult] = []
    if not config.ebn0_db:
        return rows
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            for ebn0 in config.ebn0_db:
                rows.extend(run_point(config, ebn0, executor=pool))
    else:
        for ebn0 in config.ebn0_db:
            rows.extend(run_point(config, ebn0))
    return rows
