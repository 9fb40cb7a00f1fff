"""Frame-level receiver chains tying detectors to the LDPC decoder.

A frame carries 576 constellation symbols, filled antenna-first: symbol t
rides antenna t mod N_t of symbol vector floor(t / N_t).  With a layered
constellation each layer has its own length-1152 codeword whose bits
(2t, 2t+1) form symbol t's label pair for that layer; a flat 16-point
constellation uses one length-2304 codeword with bits (4t..4t+3) as
symbol t's label.

Every receiver here accepts several frames stacked along the vector axis
(their fading blocks concatenated, mapping holding absolute block
indices) so decoding and detection stay batched across frames.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import detect, wimax_ldpc
from .constellation import LayeredConstellation, labels_to_bits

SYMBOLS_PER_FRAME = 576


@dataclass(frozen=True)
class ReceiverOptions:
    """Knobs shared by the coded receivers."""

    max_log: bool = False
    llr_clamp: float = 50.0
    decoder_algorithm: str = "sum_product"
    decoder_max_iter: int = 50


@dataclass
class CodedDetectionResult:
    """Per-layer decoding results for a stack of frames."""

    layer_info_bits: list[np.ndarray]
    layer_iterations: list[np.ndarray]
    layer_converged: list[np.ndarray]


def bits_to_labels(bits: np.ndarray, bits_per_label: int) -> np.ndarray:
    """Group consecutive bits (MSB first) into label indices."""
    arr = np.asarray(bits)
    shaped = arr.reshape(arr.shape[:-1] + (-1, bits_per_label))
    weights = 1 << np.arange(bits_per_label - 1, -1, -1)
    return shaped @ weights


def labels_to_bit_stream(labels: np.ndarray, bits_per_label: int) -> np.ndarray:
    """Inverse of bits_to_labels along the last axis."""
    bits = labels_to_bits(labels, bits_per_label)
    return bits.reshape(labels.shape[:-1] + (-1,))


def labels_to_vectors(labels: np.ndarray, n_t: int) -> np.ndarray:
    """Flat per-symbol labels -> (V, n_t) with symbol t on antenna t mod n_t."""
    return labels.reshape(-1, n_t)


def llrs_to_codewords(llrs: np.ndarray, frames: int) -> np.ndarray:
    """Per-(vector, stream, bit) LLRs back to (frames, n) codeword order."""
    return llrs.reshape(frames, -1)


def _decode_layer(
    code: wimax_ldpc.QcLdpcCode,
    llrs: np.ndarray,
    frames: int,
    opts: ReceiverOptions,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    cw_llrs = detect.clamp_llrs(llrs_to_codewords(llrs, frames), opts.llr_clamp)
    hard, iters, conv = wimax_ldpc.decode_batch(
        code,
        cw_llrs,
        max_iter=opts.decoder_max_iter,
        algorithm=opts.decoder_algorithm,
    )
    return hard[:, : code.k], iters, conv


def two_stage_mmse_ml(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    cst: LayeredConstellation,
    codes: list[wimax_ldpc.QcLdpcCode],
    n0: float,
    frames: int = 1,
    opts: ReceiverOptions = ReceiverOptions(),
    counter: detect.ComplexityCounter | None = None,
) -> CodedDetectionResult:
    """Two-layer receiver: MMSE base detection, cancellation, ML refinement.

    Stage 1 treats the enhancement layer as noise, decodes the base
    codeword from per-stream MMSE outputs, re-encodes it, and subtracts
    its channel image.  Stage 2 runs exhaustive joint ML over the
    enhancement 4-QAM alone.
    """
    if cst.layers != 2 or len(codes) != 2:
        raise ValueError("two_stage_mmse_ml needs a 2-layer constellation and 2 codes")
    e_base, e_enh = cst.layer_energy
    stats = detect.mmse_stage(h_blocks, n0, e_base, e_enh, counter=counter)
    z = detect.mmse_apply(stats, mapping, y)
    base_llrs = detect.scalar_llrs(
        z,
        stats.beta[mapping],
        stats.sigma2[mapping],
        cst.layer_centroids[0],
        max_log=opts.max_log,
        counter=counter,
    )
    base_info, base_iters, base_conv = _decode_layer(
        codes[0], base_llrs, frames, opts
    )

    base_cw = wimax_ldpc.encode_batch(codes[0], base_info)
    base_labels = bits_to_labels(base_cw.reshape(-1), 2)
    x_base = labels_to_vectors(cst.layer_centroids[0][base_labels], h_blocks.shape[2])
    y_clean = detect.cancel(y, h_blocks, mapping, x_base)

    enh_llrs = detect.ml_joint_llrs(
        y_clean,
        h_blocks,
        mapping,
        n0,
        cst.layer_centroids[1],
        max_log=opts.max_log,
        counter=counter,
    )
    enh_info, enh_iters, enh_conv = _decode_layer(codes[1], enh_llrs, frames, opts)
    return CodedDetectionResult(
        layer_info_bits=[base_info, enh_info],
        layer_iterations=[base_iters, enh_iters],
        layer_converged=[base_conv, enh_conv],
    )


def multi_stage(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    cst: LayeredConstellation,
    codes: list[wimax_ldpc.QcLdpcCode],
    n0: float,
    frames: int = 1,
    opts: ReceiverOptions = ReceiverOptions(),
    counter: detect.ComplexityCounter | None = None,
) -> CodedDetectionResult:
    """Successive per-layer receiver for any layer count P >= 2.

    Layers 1..P-1 are detected by MMSE (remaining layers modeled as
    noise), decoded, re-encoded, and cancelled; the final layer gets
    exhaustive joint ML on the residual.  For P = 2 this matches
    two_stage_mmse_ml bit for bit.
    """
    if cst.layers < 2 or len(codes) != cst.layers:
        raise ValueError("multi_stage needs P >= 2 layers and one code per layer")
    n_t = h_blocks.shape[2]
    energies = cst.layer_energy
    residual_y = y
    info_list, iter_list, conv_list = [], [], []
    for p in range(cst.layers):
        centroids = cst.layer_centroids[p]
        if p < cst.layers - 1:
            e_rest = float(energies[p + 1 :].sum())
            stats = detect.mmse_stage(
                h_blocks, n0, float(energies[p]), e_rest, counter=counter
            )
            z = detect.mmse_apply(stats, mapping, residual_y)
            llrs = detect.scalar_llrs(
                z,
                stats.beta[mapping],
                stats.sigma2[mapping],
                centroids,
                max_log=opts.max_log,
                counter=counter,
            )
        else:
            llrs = detect.ml_joint_llrs(
                residual_y,
                h_blocks,
                mapping,
                n0,
                centroids,
                max_log=opts.max_log,
                counter=counter,
            )
        info, iters, conv = _decode_layer(codes[p], llrs, frames, opts)
        info_list.append(info)
        iter_list.append(iters)
        conv_list.append(conv)
        if p < cst.layers - 1:
            cw = wimax_ldpc.encode_batch(codes[p], info)
            lab = bits_to_labels(cw.reshape(-1), 2)
            x_p = labels_to_vectors(centroids[lab], n_t)
            residual_y = detect.cancel(residual_y, h_blocks, mapping, x_p)
    return CodedDetectionResult(
        layer_info_bits=info_list,
        layer_iterations=iter_list,
        layer_converged=conv_list,
    )


def mmse_single(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    points: np.ndarray,
    code: wimax_ldpc.QcLdpcCode,
    n0: float,
    frames: int = 1,
    opts: ReceiverOptions = ReceiverOptions(),
    counter: detect.ComplexityCounter | None = None,
) -> CodedDetectionResult:
    """Linear baseline: per-stream MMSE over a flat constellation."""
    stats = detect.mmse_stage(h_blocks, n0, 1.0, 0.0, counter=counter)
    z = detect.mmse_apply(stats, mapping, y)
    llrs = detect.scalar_llrs(
        z,
        stats.beta[mapping],
        stats.sigma2[mapping],
        points,
        max_log=opts.max_log,
        counter=counter,
    )
    info, iters, conv = _decode_layer(code, llrs, frames, opts)
    return CodedDetectionResult(
        layer_info_bits=[info], layer_iterations=[iters], layer_converged=[conv]
    )


def ml_single(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    points: np.ndarray,
    code: wimax_ldpc.QcLdpcCode,
    n0: float,
    frames: int = 1,
    opts: ReceiverOptions = ReceiverOptions(),
    counter: detect.ComplexityCounter | None = None,
) -> CodedDetectionResult:
    """Exhaustive baseline: joint ML over the full constellation."""
    llrs = detect.ml_joint_llrs(
        y, h_blocks, mapping, n0, points, max_log=opts.max_log, counter=counter
    )
    info, iters, conv = _decode_layer(code, llrs, frames, opts)
    return CodedDetectionResult(
        layer_info_bits=[info], layer_iterations=[iters], layer_converged=[conv]
    )


def ml_ml_uncoded(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    cst: LayeredConstellation,
    counter: detect.ComplexityCounter | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    """Hard two-stage detector without coding, for raw BER studies.

    Stage 1 does joint ML over base-layer centroids only (enhancement
    acts as unmodeled interference, leaving an error floor), cancels the
    decisions, and stage 2 does joint ML over the enhancement centroids.
    Returns (base_labels, enh_labels), each (V, N_t).
    """
    if cst.layers != 2:
        raise ValueError("ml_ml_uncoded expects a 2-layer constellation")
    base_labels = detect.hard_ml_detect(
        y, h_blocks, mapping, cst.layer_centroids[0], counter=counter
    )
    x_base = cst.layer_centroids[0][base_labels]
    y_clean = detect.cancel(y, h_blocks, mapping, x_base)
    enh_labels = detect.hard_ml_detect(
        y_clean, h_blocks, mapping, cst.layer_centroids[1], counter=counter
    )
    return base_labels, enh_labels
