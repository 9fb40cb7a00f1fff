"""Quasi-cyclic LDPC codes of the IEEE 802.16e (WiMAX) family.

Codes are defined by a 24-column base matrix of circulant shifts (-1 for an
all-zero block) at mother block size 96; smaller block sizes scale every
nonnegative shift by floor(p*z/96).  Encoding exploits the dual-diagonal
parity structure: the first parity column carries equal shifts at its top
and bottom rows and a zero shift in between, so the block-row sum isolates
the first parity block and the staircase yields the rest by forward
substitution.

Decoding is flooding belief propagation on the expanded Tanner graph,
either exact sum-product (tanh rule, the default) or normalized min-sum.
LLR sign convention throughout: positive means bit 0 is more likely.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import numpy as np

_ASSETS = {
    "1/2": "wimax_r12.txt",
    "2/3A": "wimax_r23a.txt",
    "3/4A": "wimax_r34a.txt",
    "5/6": "wimax_r56.txt",
}

_MSG_CLIP = 1.0 - 1e-15
_TANH_FLOOR = 1e-30


def _read_base_matrix(name: str) -> tuple[np.ndarray, int]:
    text = (
        importlib.resources.files("hqmimo.codes").joinpath(name).read_text()
    )
    lines = [ln for ln in text.splitlines() if ln.strip()]
    m_b, n_b, z0 = (int(v) for v in lines[0].split())
    rows = [[int(v) for v in ln.split()] for ln in lines[1 : 1 + m_b]]
    base = np.array(rows, dtype=np.int64)
    if base.shape != (m_b, n_b):
        raise ValueError(f"malformed base matrix asset {name}")
    return base, z0


@dataclass(frozen=True)
class QcLdpcCode:
    """Expanded quasi-cyclic code: base shift matrix plus block size z."""

    rate_id: str
    base_matrix: np.ndarray
    z: int

    @property
    def m_b(self) -> int:
        return self.base_matrix.shape[0]

    @property
    def n_b(self) -> int:
        return self.base_matrix.shape[1]

    @property
    def n(self) -> int:
        return self.n_b * self.z

    @property
    def k(self) -> int:
        return (self.n_b - self.m_b) * self.z

    @property
    def m(self) -> int:
        return self.m_b * self.z

    @property
    def rate(self) -> float:
        return self.k / self.n


@dataclass
class DecodeOutcome:
    """Decoder result; converged means the hard decision has zero syndrome."""

    hard_bits: np.ndarray
    info_bits: np.ndarray
    iterations: int
    converged: bool


def load_code(rate_id: str, n: int) -> QcLdpcCode:
    """Load a code for the given rate and codeword length in bits.

    Shifts are adapted from the mother block size by p' = floor(p*z/z0)
    for p >= 0; -1 entries stay -1.
    """
    if rate_id not in _ASSETS:
        raise ValueError(
            f"unsupported rate {rate_id!r}; choose from {sorted(_ASSETS)}"
        )
    base, z0 = _read_base_matrix(_ASSETS[rate_id])
    n_b = base.shape[1]
    if n % n_b != 0:
        raise ValueError(f"codeword length {n} not a multiple of {n_b}")
    z = n // n_b
    if not 1 <= z <= z0:
        raise ValueError(f"block size {z} outside [1, {z0}]")
    scaled = np.where(base >= 0, base * z // z0, -1)
    return QcLdpcCode(rate_id=rate_id, base_matrix=scaled, z=z)


def _parity_structure(code: QcLdpcCode) -> tuple[int, int, int]:
    """(first parity column, its top/bottom shift, its middle row)."""
    c0 = code.n_b - code.m_b
    col = code.base_matrix[:, c0]
    rows = np.flatnonzero(col >= 0)
    if len(rows) != 3 or rows[0] != 0 or rows[-1] != code.m_b - 1:
        raise ValueError("unexpected first-parity-column structure")
    top, mid, bot = col[rows]
    if top != bot or mid != 0:
        raise ValueError("first parity column lacks the (x, 0, x) pattern")
    return c0, int(top), int(rows[1])


def encode_batch(code: QcLdpcCode, info: np.ndarray) -> np.ndarray:
    """Systematic encoding of a batch of info words, shape (B, k) -> (B, n)."""
    info = np.asarray(info, dtype=np.uint8)
    if info.ndim != 2 or info.shape[1] != code.k:
        raise ValueError(f"expected info shape (B, {code.k}), got {info.shape}")
    z = code.z
    batch = info.shape[0]
    c0, x_shift, r_mid = _parity_structure(code)
    u_blocks = info.reshape(batch, c0, z)

    lam = np.zeros((code.m_b, batch, z), dtype=np.uint8)
    for i in range(code.m_b):
        for j in range(c0):
            s = code.base_matrix[i, j]
            if s >= 0:
                lam[i] ^= np.roll(u_blocks[:, j], -int(s), axis=-1)

    parity = np.zeros((code.m_b, batch, z), dtype=np.uint8)
    q0 = lam[0].copy()
    for i in range(1, code.m_b):
        q0 ^= lam[i]
    parity[0] = q0
    parity[1] = lam[0] ^ np.roll(q0, -x_shift, axis=-1)
    for t in range(1, code.m_b - 1):
        parity[t + 1] = parity[t] ^ lam[t]
        if t == r_mid:
            parity[t + 1] ^= q0

    cw = np.concatenate(
        [info, parity.transpose(1, 0, 2).reshape(batch, code.m_b * z)], axis=1
    )
    return cw


def encode(code: QcLdpcCode, info: np.ndarray) -> np.ndarray:
    """Systematic encoding of one info word of length k."""
    info = np.asarray(info, dtype=np.uint8)
    if info.shape != (code.k,):
        raise ValueError(f"expected {code.k} info bits, got shape {info.shape}")
    return encode_batch(code, info[None, :])[0]


def syndrome_batch(code: QcLdpcCode, bits: np.ndarray) -> np.ndarray:
    """H*c over GF(2) for a batch of words, shape (B, n) -> (B, m)."""
    bits = np.asarray(bits, dtype=np.uint8)
    batch = bits.shape[0]
    z = code.z
    blocks = bits.reshape(batch, code.n_b, z)
    out = np.zeros((batch, code.m_b, z), dtype=np.uint8)
    for i in range(code.m_b):
        for j in range(code.n_b):
            s = code.base_matrix[i, j]
            if s >= 0:
                out[:, i] ^= np.roll(blocks[:, j], -int(s), axis=-1)
    return out.reshape(batch, code.m)


def syndrome(code: QcLdpcCode, bits: np.ndarray) -> np.ndarray:
    """H*c over GF(2) for one word of length n."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.shape != (code.n,):
        raise ValueError(f"expected {code.n} bits, got shape {bits.shape}")
    return syndrome_batch(code, bits[None, :])[0]


def expand_h(code: QcLdpcCode) -> np.ndarray:
    """Dense expanded parity-check matrix, shape (m, n), dtype uint8."""
    z = code.z
    h = np.zeros((code.m, code.n), dtype=np.uint8)
    rows = np.arange(z)
    for i in range(code.m_b):
        for j in range(code.n_b):
            s = code.base_matrix[i, j]
            if s >= 0:
                h[i * z + rows, j * z + (rows + s) % z] = 1
    return h


def gf2_rank(mat: np.ndarray) -> int:
    """Rank over GF(2) via bit-packed Gaussian elimination."""
    packed = np.packbits(np.asarray(mat, dtype=np.uint8), axis=1)
    words = [row.tobytes() for row in packed]
    pivots: list[int] = []
    rank = 0
    rows = [int.from_bytes(w, "big") for w in words]
    for row in rows:
        cur = row
        for pivot in pivots:
            nxt = cur ^ pivot
            if nxt < cur:
                cur = nxt
        if cur:
            pivots.append(cur)
            pivots.sort(reverse=True)
            rank += 1
    return rank


class _TannerGraph:
    """Edge arrays of the expanded graph, grouped for flooding updates."""

    def __init__(self, code: QcLdpcCode):
        z = code.z
        entries = [
            (i, j, int(s))
            for i in range(code.m_b)
            for j in range(code.n_b)
            if (s := code.base_matrix[i, j]) >= 0
        ]
        rows_i = np.array([e[0] for e in entries])
        cols_j = np.array([e[1] for e in entries])
        shifts = np.array([e[2] for e in entries])

        # Order edges by check index: all edges of check i*z+r are contiguous.
        order = np.argsort(rows_i, kind="stable")
        rows_i, cols_j, shifts = rows_i[order], cols_j[order], shifts[order]
        r = np.arange(z)
        # edge (t, r): check rows_i[t]*z + r, var cols_j[t]*z + (r+shift)%z
        check_of_edge = (rows_i[:, None] * z + r).ravel()
        var_of_edge = (cols_j[:, None] * z + (r + shifts[:, None]) % z).ravel()
        order = np.argsort(check_of_edge, kind="stable")
        self.check_of_edge = check_of_edge[order]
        self.var_of_edge = var_of_edge[order]
        self.n_edges = len(self.var_of_edge)
        self.n_checks = code.m
        self.n_vars = code.n

        counts = np.bincount(self.check_of_edge, minlength=self.n_checks)
        self.check_starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
        self.var_perm = np.argsort(self.var_of_edge, kind="stable")
        vcounts = np.bincount(self.var_of_edge, minlength=self.n_vars)
        self.var_starts = np.concatenate([[0], np.cumsum(vcounts)[:-1]])


_GRAPH_CACHE: dict[tuple[str, int], _TannerGraph] = {}


def _graph(code: QcLdpcCode) -> _TannerGraph:
    key = (code.rate_id, code.z)
    if key not in _GRAPH_CACHE:
        _GRAPH_CACHE[key] = _TannerGraph(code)
    return _GRAPH_CACHE[key]


def _check_update_sumproduct(v2c: np.ndarray, g: _TannerGraph) -> np.ndarray:
    t = np.tanh(0.5 * v2c)
    sign = np.where(t >= 0, 1.0, -1.0)
    t = sign * np.maximum(np.abs(t), _TANH_FLOOR)
    prod = np.multiply.reduceat(t, g.check_starts, axis=0)
    ratio = prod[g.check_of_edge] / t
    np.clip(ratio, -_MSG_CLIP, _MSG_CLIP, out=ratio)
    return 2.0 * np.arctanh(ratio)


def _check_update_minsum(
    v2c: np.ndarray, g: _TannerGraph, alpha: float
) -> np.ndarray:
    mag = np.abs(v2c)
    sign = np.where(v2c >= 0, 1.0, -1.0)
    sign_prod = np.multiply.reduceat(sign, g.check_starts, axis=0)
    min1 = np.minimum.reduceat(mag, g.check_starts, axis=0)
    min1_e = min1[g.check_of_edge]
    # The edge holding the segment minimum must receive the second-smallest
    # magnitude; ties resolve to the first attaining edge.
    pos = np.arange(mag.shape[0])
    pos = pos[:, None] if mag.ndim == 2 else pos
    hit = mag == min1_e
    first_pos = np.minimum.reduceat(
        np.where(hit, pos, mag.shape[0]), g.check_starts, axis=0
    )
    at_min = hit & (pos == first_pos[g.check_of_edge])
    min2 = np.minimum.reduceat(
        np.where(at_min, np.inf, mag), g.check_starts, axis=0
    )
    out_mag = np.where(at_min, min2[g.check_of_edge], min1_e)
    out_sign = sign_prod[g.check_of_edge] * sign
    return alpha * out_sign * out_mag


def decode_batch(
    code: QcLdpcCode,
    llrs: np.ndarray,
    max_iter: int = 50,
    algorithm: str = "sum_product",
    minsum_alpha: float = 0.75,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Decode a batch of LLR vectors, shape (B, n).

    Returns (hard_bits (B, n) uint8, iterations (B,), converged (B,) bool).
    Positive LLR means bit 0.  Early-stops each frame on zero syndrome.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.ndim != 2 or llrs.shape[1] != code.n:
        raise ValueError(f"expected LLR shape (B, {code.n}), got {llrs.shape}")
    if not np.all(np.isfinite(llrs)):
        raise ValueError("non-finite LLR input")
    if algorithm not in ("sum_product", "min_sum"):
        raise ValueError(f"unknown decoder algorithm {algorithm!r}")

    g = _graph(code)
    batch = llrs.shape[0]
    hard = np.zeros((batch, code.n), dtype=np.uint8)
    iters = np.zeros(batch, dtype=np.int64)
    conv = np.zeros(batch, dtype=bool)

    bits0 = (llrs < 0).astype(np.uint8)
    ok = ~syndrome_batch(code, bits0).any(axis=1)
    hard[ok] = bits0[ok]
    conv[ok] = True
    active = np.flatnonzero(~ok)
    if len(active) == 0 or max_iter == 0:
        hard[~conv] = bits0[~conv]
        return hard, iters, conv

    # Work arrays hold active frames as columns: shape (E, B_active).
    ch = llrs[active].T[g.var_of_edge]  # channel LLR replicated per edge
    llr_active = llrs[active].T
    c2v = np.zeros_like(ch)
    v2c = ch.copy()

    for it in range(1, max_iter + 1):
        if algorithm == "sum_product":
            c2v = _check_update_sumproduct(v2c, g)
        else:
            c2v = _check_update_minsum(v2c, g, minsum_alpha)

        total = llr_active + np.add.reduceat(
            c2v[g.var_perm], g.var_starts, axis=0
        )
        v2c = total[g.var_of_edge] - c2v

        bits = (total < 0).astype(np.uint8).T
        done = ~syndrome_batch(code, bits).any(axis=1)
        if done.any():
            idx = active[done]
            hard[idx] = bits[done]
            iters[idx] = it
            conv[idx] = True
            keep = ~done
            active = active[keep]
            if len(active) == 0:
                break
            llr_active = llr_active[:, keep]
            c2v = c2v[:, keep]
            v2c = v2c[:, keep]

    if len(active) > 0:
        total = llr_active + np.add.reduceat(
            c2v[g.var_perm], g.var_starts, axis=0
        )
        hard[active] = (total < 0).astype(np.uint8).T
        iters[active] = max_iter
    return hard, iters, conv


def decode(
    code: QcLdpcCode,
    llrs: np.ndarray,
    max_iter: int = 50,
    algorithm: str = "sum_product",
) -> DecodeOutcome:
    """Decode one LLR vector of length n."""
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.shape != (code.n,):
        raise ValueError(f"expected {code.n} LLRs, got shape {llrs.shape}")
    hard, iters, conv = decode_batch(
        code, llrs[None, :], max_iter=max_iter, algorithm=algorithm
    )
    return DecodeOutcome(
        hard_bits=hard[0],
        info_bits=hard[0, : code.k].copy(),
        iterations=int(iters[0]),
        converged=bool(conv[0]),
    )
