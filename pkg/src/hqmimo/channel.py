"""Flat Rayleigh MIMO channel with block fading and noise scaling.

The received vector is y = (1/sqrt(N_t)) H x + n with H entries i.i.d.
CN(0, 1) and n CN(0, n0 I).  The 1/sqrt(N_t) factor keeps total transmit
power at 1 regardless of antenna count, so Eb/N0 maps to n0 through the
spectral efficiency alone.

Fading granularity is controlled by the block count: a frame's symbol
vectors are split evenly into n_blocks groups that each see one H draw.
"per_vector_iid" redraws H for every vector instead.
"""

from __future__ import annotations

import numpy as np

FADING_MODES = ("block_fading", "per_vector_iid")


def frame_rng(master_seed: int, frame_index: int) -> np.random.Generator:
    """Independent per-frame substream; same (seed, index) -> same draws."""
    key = np.array([master_seed, frame_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def ebn0_to_n0(
    ebn0_db: float,
    code_rate: float,
    bits_per_symbol: int,
    n_streams: int = 1,
) -> float:
    """Complex noise variance for unit total transmit power per channel use.

    One channel use carries n_streams * bits_per_symbol * code_rate
    information bits on unit energy, so
    n0 = 1 / (10^(dB/10) * R * m * N_t).
    """
    if code_rate <= 0 or bits_per_symbol <= 0 or n_streams <= 0:
        raise ValueError("code_rate, bits_per_symbol, n_streams must be positive")
    bits_per_use = code_rate * bits_per_symbol * n_streams
    return 1.0 / (10.0 ** (ebn0_db / 10.0) * bits_per_use)


def complex_randn(rng: np.random.Generator, shape: tuple[int, ...]) -> np.ndarray:
    """CN(0, 1) samples: variance 1/2 per real dimension."""
    re = rng.standard_normal(shape)
    im = rng.standard_normal(shape)
    return (re + 1j * im) / np.sqrt(2.0)


def block_of_vector(n_vectors: int, n_blocks: int) -> np.ndarray:
    """Map vector index v to fading block floor(v * n_blocks / n_vectors)."""
    if not 1 <= n_blocks <= n_vectors:
        raise ValueError("need 1 <= n_blocks <= n_vectors")
    return (np.arange(n_vectors) * n_blocks) // n_vectors


def draw_channel(
    rng: np.random.Generator,
    n_vectors: int,
    n_r: int,
    n_t: int,
    mode: str = "block_fading",
    n_blocks: int = 8,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw fading for one frame.

    Returns (h_blocks, mapping): h_blocks has shape (n_blocks, n_r, n_t)
    and mapping[v] is the block index of vector v.  In per_vector_iid
    mode every vector is its own block.
    """
    if mode not in FADING_MODES:
        raise ValueError(f"unknown fading mode {mode!r}")
    if mode == "per_vector_iid":
        n_blocks = n_vectors
    mapping = block_of_vector(n_vectors, n_blocks)
    h_blocks = complex_randn(rng, (n_blocks, n_r, n_t))
    return h_blocks, mapping


def transmit(
    h_blocks: np.ndarray,
    mapping: np.ndarray,
    x: np.ndarray,
    n0: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """y_v = (1/sqrt(N_t)) H_{b(v)} x_v + n_v for a frame of vectors.

    x has shape (V, n_t); the result has shape (V, n_r).
    """
    n_t = h_blocks.shape[2]
    if x.shape != (len(mapping), n_t):
        raise ValueError(f"expected x shape ({len(mapping)}, {n_t}), got {x.shape}")
    if n0 < 0:
        raise ValueError("n0 must be nonnegative")
    clean = np.einsum("vrt,vt->vr", h_blocks[mapping], x) / np.sqrt(n_t)
    noise = complex_randn(rng, clean.shape) * np.sqrt(n0)
    return clean + noise
