"""Per-antenna detectors for spatial multiplexing: MMSE and exhaustive ML.

All functions work on one frame's fading blocks: h_blocks (B, N_r, N_t)
plus a mapping array giving each symbol vector's block index.  The channel
model is y = (1/sqrt(N_t)) H x + n, so every H product below carries that
normalization.

LLR sign convention: positive means bit 0 is more likely.  LLRs returned
here are unclamped; callers clamp before handing them to a decoder.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import bit_subsets


@dataclass
class ComplexityCounter:
    """Tallies of the two cost drivers across a run."""

    metric_evaluations: int = 0
    matrix_inversions: int = 0

    def add(self, other: "ComplexityCounter") -> None:
        self.metric_evaluations += other.metric_evaluations
        self.matrix_inversions += other.matrix_inversions


@dataclass(frozen=True)
class MmseStageStats:
    """Per-block MMSE filters with the scalarized channel each produces.

    filters[b][:, i] is stream i's receive filter g_i; the filter output
    z_i = g_i^H y behaves as beta_i * x_i plus noise of variance sigma2_i
    (undetected layers and cross-stream leakage included).
    """

    filters: np.ndarray
    beta: np.ndarray
    sigma2: np.ndarray


def mmse_stage(
    h_blocks: np.ndarray,
    n0: float,
    e_signal: float,
    e_residual: float,
    counter: ComplexityCounter | None = None,
) -> MmseStageStats:
    """MMSE filters for detecting a layer of energy e_signal per stream.

    e_residual is the per-stream energy of layers not yet cancelled and
    not being detected; interfering streams carry e_signal + e_residual.
    The filter for stream i is

        g_i = (e_signal / sqrt(N_t)) R^{-1} h_i,
        R = ((e_signal + e_residual) / N_t) H H^H + n0 I.
    """
    if h_blocks.ndim != 3:
        raise ValueError("h_blocks must have shape (B, N_r, N_t)")
    if n0 <= 0 or e_signal <= 0 or e_residual < 0:
        raise ValueError("need n0 > 0, e_signal > 0, e_residual >= 0")
    n_blocks, n_r, n_t = h_blocks.shape
    e_total = e_signal + e_residual

    gram = np.einsum("brt,bst->brs", h_blocks, h_blocks.conj())
    r_yy = (e_total / n_t) * gram + n0 * np.eye(n_r)
    filters = (e_signal / np.sqrt(n_t)) * (np.linalg.inv(r_yy) @ h_blocks)
    if counter is not None:
        counter.matrix_inversions += n_blocks

    # cross[b, i, k] = g_i^H h_k
    cross = np.einsum("bri,brk->bik", filters.conj(), h_blocks)
    diag = np.einsum("bii->bi", cross)
    beta = diag / np.sqrt(n_t)
    leak2 = np.abs(cross) ** 2
    own2 = np.abs(diag) ** 2
    sigma2 = (
        (e_residual / n_t) * own2
        + (e_total / n_t) * (leak2.sum(axis=2) - own2)
        + n0 * np.einsum("bri,bri->bi", filters.conj(), filters).real
    )
    return MmseStageStats(filters=filters, beta=beta, sigma2=sigma2)


def mmse_apply(
    stats: MmseStageStats, mapping: np.ndarray, y: np.ndarray
) -> np.ndarray:
    """Filter outputs z[v, i] = g_i^H y_v, shape (V, N_t)."""
    return np.einsum("vri,vr->vi", stats.filters[mapping].conj(), y)


def _max_last_axis(metric: np.ndarray) -> np.ndarray:
    return np.max(metric, axis=-1)


def _logsumexp(metric: np.ndarray) -> np.ndarray:
    top = np.max(metric, axis=-1)
    return top + np.log(np.sum(np.exp(metric - top[..., None]), axis=-1))


def scalar_llrs(
    z: np.ndarray,
    beta: np.ndarray,
    sigma2: np.ndarray,
    points: np.ndarray,
    max_log: bool = False,
    counter: ComplexityCounter | None = None,
) -> np.ndarray:
    """Bit LLRs for a scalarized stream z = beta*x + noise(sigma2).

    z, beta, sigma2 share a shape; points is the label-indexed candidate
    set of the layer being detected.  Returns shape z.shape + (n_bits,).
    """
    points = np.asarray(points)
    n_bits = int(np.log2(len(points)))
    if 1 << n_bits != len(points):
        raise ValueError("candidate set size must be a power of two")
    if np.any(np.asarray(sigma2) <= 0):
        raise ValueError("sigma2 must be positive")
    z = np.asarray(z)
    metric = -np.abs(z[..., None] - np.asarray(beta)[..., None] * points) ** 2
    metric = metric / np.asarray(sigma2)[..., None]
    if counter is not None:
        counter.metric_evaluations += metric.size
    reduce = _max_last_axis if max_log else _logsumexp
    ones = bit_subsets(n_bits)
    out = np.empty(z.shape + (n_bits,))
    for j in range(n_bits):
        out[..., j] = reduce(metric[..., ~ones[j]]) - reduce(metric[..., ones[j]])
    return out


def vector_candidates(
    points: np.ndarray, n_t: int
) -> tuple[np.ndarray, np.ndarray]:
    """All length-n_t symbol vectors over a candidate set.

    Returns (symbols (K, n_t) complex, labels (K, n_t) int) with
    K = len(points)^n_t.  Stream 0 is the slowest-varying digit, so
    candidate c has labels[c, i] = digit i of c in base len(points).
    """
    m = len(points)
    if n_t * np.log2(m) > 32:
        raise ValueError(
            f"candidate space {m}^{n_t} too large to enumerate"
        )
    grids = np.meshgrid(*([np.arange(m)] * n_t), indexing="ij")
    labels = np.stack([g.ravel() for g in grids], axis=-1)
    return np.asarray(points)[labels], labels


_METRIC_BUDGET = 16_000_000


def _joint_metrics(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    cand_symbols: np.ndarray,
    counter: ComplexityCounter | None,
) -> np.ndarray:
    """-||y - (1/sqrt(N_t)) H x_c||^2 for every vector and candidate."""
    n_t = h_blocks.shape[2]
    n_vec = y.shape[0]
    k = cand_symbols.shape[0]
    y_pow = np.sum(np.abs(y) ** 2, axis=1)
    out = np.empty((n_vec, k))
    if 4 * h_blocks.shape[0] <= n_vec:
        # Blocks are reused: form H x_c once per block and correlate all
        # of that block's vectors against it in one product.
        for b in range(h_blocks.shape[0]):
            sel = mapping == b
            if not sel.any():
                continue
            s = (h_blocks[b] @ cand_symbols.T) / np.sqrt(n_t)  # (N_r, K)
            s_pow = np.sum(np.abs(s) ** 2, axis=0)
            corr = y[sel].conj() @ s
            out[sel] = -(y_pow[sel, None] - 2.0 * corr.real + s_pow[None, :])
    else:
        # Near per-vector fading: batch across vectors, chunked so the
        # expanded (v, N_r, K) product stays within the work budget.
        step = max(1, _METRIC_BUDGET // (y.shape[1] * k))
        for lo in range(0, n_vec, step):
            hi = min(lo + step, n_vec)
            s = (
                np.einsum("vrt,kt->vrk", h_blocks[mapping[lo:hi]], cand_symbols)
                / np.sqrt(n_t)
            )
            s_pow = np.sum(np.abs(s) ** 2, axis=1)
            corr = np.einsum("vr,vrk->vk", y[lo:hi].conj(), s)
            out[lo:hi] = -(y_pow[lo:hi, None] - 2.0 * corr.real + s_pow)
    if counter is not None:
        counter.metric_evaluations += n_vec * k
    return out


def ml_joint_llrs(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    n0: float,
    points: np.ndarray,
    max_log: bool = False,
    counter: ComplexityCounter | None = None,
) -> np.ndarray:
    """Exhaustive joint ML bit LLRs, shape (V, N_t, n_bits).

    Marginalizes exp(-||y - (1/sqrt(N_t)) H x||^2 / n0) over all
    len(points)^N_t candidate vectors per bit hypothesis.
    """
    if n0 <= 0:
        raise ValueError("n0 must be positive")
    n_t = h_blocks.shape[2]
    n_bits = int(np.log2(len(points)))
    cand_symbols, cand_labels = vector_candidates(points, n_t)
    metric = _joint_metrics(y, h_blocks, mapping, cand_symbols, counter) / n0
    reduce = _max_last_axis if max_log else _logsumexp
    ones = bit_subsets(n_bits)
    out = np.empty((y.shape[0], n_t, n_bits))
    for i in range(n_t):
        bit_is_one = ones[:, cand_labels[:, i]]  # (n_bits, K)
        for j in range(n_bits):
            out[:, i, j] = reduce(metric[:, ~bit_is_one[j]]) - reduce(
                metric[:, bit_is_one[j]]
            )
    return out


def hard_ml_detect(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    points: np.ndarray,
    counter: ComplexityCounter | None = None,
) -> np.ndarray:
    """Joint ML hard decisions: label indices per stream, shape (V, N_t).

    Ties resolve to the lowest candidate index.
    """
    cand_symbols, cand_labels = vector_candidates(points, h_blocks.shape[2])
    metric = _joint_metrics(y, h_blocks, mapping, cand_symbols, counter)
    return cand_labels[np.argmax(metric, axis=1)]


def cancel(
    y: np.ndarray,
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    x_hat: np.ndarray,
) -> np.ndarray:
    """Subtract the channel-shaped contribution of detected symbols x_hat."""
    n_t = h_blocks.shape[2]
    return y - np.einsum("vrt,vt->vr", h_blocks[mapping], x_hat) / np.sqrt(n_t)


def clamp_llrs(llrs: np.ndarray, limit: float = 50.0) -> np.ndarray:
    """Bound LLR magnitudes before decoding; NaN is rejected, inf clamps."""
    if np.isnan(llrs).any():
        raise ValueError("NaN LLR")
    return np.clip(llrs, -limit, limit)
