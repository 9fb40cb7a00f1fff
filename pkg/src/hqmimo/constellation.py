"""Layered (hierarchical) QAM constellations.

A hierarchical constellation is a sum of P nested 4-QAM layers: each symbol
is x = x_1 + ... + x_P where layer p contributes an offset of amplitude
d_p/2 per real dimension.  The amplitudes are set by the user-supplied
minimum-distance ratios d_p/d_{p+1} and normalized so the composite
constellation has unit average power.

Per layer, two bits select the offset signs: the first bit picks the
in-phase sign, the second the quadrature sign, 0 mapping to +.  The
quadrant code per layer is therefore 00 -> (+,+), 01 -> (+,-),
11 -> (-,-), 10 -> (-,+).  This table is frozen; labels are reproducible
across runs and platforms.  Composite labels concatenate the layers'
bit pairs, base layer first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class HqamParams:
    """Layer count and consecutive minimum-distance ratios (length P-1)."""

    layers: int
    ratios: tuple[float, ...] = ()

    def __post_init__(self):
        if self.layers < 1:
            raise ValueError("layer count must be >= 1")
        ratios = tuple(float(r) for r in self.ratios)
        if len(ratios) != self.layers - 1:
            raise ValueError(
                f"expected {self.layers - 1} ratios for {self.layers} layers, "
                f"got {len(ratios)}"
            )
        if any(r <= 0 for r in ratios):
            raise ValueError("all distance ratios must be > 0")
        object.__setattr__(self, "ratios", ratios)


@dataclass(frozen=True)
class LayeredConstellation:
    """Unit-power layered constellation with per-layer decomposition.

    points[i] is the symbol whose 2P-bit label reads i in binary (first
    label bit = MSB).  layer_centroids[p][m] is layer p's offset for that
    layer's 2-bit label m.  layer_energy[p] sums to 1 over layers.
    """

    layers: int
    points: np.ndarray
    layer_centroids: tuple[np.ndarray, ...]
    layer_energy: np.ndarray
    layer_min_distance: np.ndarray
    bits_per_symbol: int = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "bits_per_symbol", 2 * self.layers)
        self.points.setflags(write=False)
        for c in self.layer_centroids:
            c.setflags(write=False)


def quadrant_offsets(amplitude: float) -> np.ndarray:
    """4-QAM offsets indexed by 2-bit label m = 2*b_I + b_Q (0 -> +)."""
    b_i = np.array([0, 0, 1, 1])
    b_q = np.array([0, 1, 0, 1])
    return amplitude * ((1 - 2 * b_i) + 1j * (1 - 2 * b_q))


def build_hqam(params: HqamParams) -> LayeredConstellation:
    """Construct the layered constellation for the given parameters.

    Per real dimension each point's coordinate is sum_p s_p * d_p/2 with
    s_p in {-1,+1}; the d_p satisfy d_p/d_{p+1} = ratios[p] and
    sum_p d_p^2/2 = 1, so layer p carries energy d_p^2/2.
    """
    p_layers = params.layers
    # d_p relative to d_1, then normalize to unit composite power.
    rel = np.ones(p_layers)
    for p in range(1, p_layers):
        rel[p] = rel[p - 1] / params.ratios[p - 1]
    d1 = np.sqrt(2.0 / np.sum(rel**2))
    dists = d1 * rel
    amplitudes = dists / 2.0

    centroids = tuple(quadrant_offsets(a) for a in amplitudes)

    n_points = 4**p_layers
    labels = np.arange(n_points)
    points = np.zeros(n_points, dtype=complex)
    for p in range(p_layers):
        # Layer p's 2-bit sub-label sits at bit positions 2p..2p+1 (MSB first).
        shift = 2 * (p_layers - 1 - p)
        sub = (labels >> shift) & 0b11
        points += centroids[p][sub]

    return LayeredConstellation(
        layers=p_layers,
        points=points,
        layer_centroids=centroids,
        layer_energy=dists**2 / 2.0,
        layer_min_distance=dists,
    )


def standard_qam16() -> np.ndarray:
    """Gray 16-QAM points indexed by 4-bit label, unit average power.

    Per dimension the two bits (sign bit, magnitude bit) follow the Gray
    sequence 00 -> +3, 01 -> +1, 11 -> -1, 10 -> -3 (scaled by 1/sqrt(10));
    label bits are (I sign, Q sign, I magnitude, Q magnitude).
    """
    pam = {(0, 0): 3.0, (0, 1): 1.0, (1, 1): -1.0, (1, 0): -3.0}
    points = np.zeros(16, dtype=complex)
    for idx in range(16):
        b = [(idx >> k) & 1 for k in (3, 2, 1, 0)]
        points[idx] = pam[(b[0], b[2])] + 1j * pam[(b[1], b[3])]
    return points / np.sqrt(10.0)


def bit_subsets(n_bits: int) -> np.ndarray:
    """Boolean array [j, m]: bit j (MSB first) of label m is 1."""
    labels = np.arange(1 << n_bits)
    return np.array([(labels >> (n_bits - 1 - j)) & 1 for j in range(n_bits)]) == 1


def _as_label_index(cst: LayeredConstellation, bits) -> int:
    bits = np.asarray([int(b) for b in bits] if isinstance(bits, str) else bits)
    if bits.shape != (cst.bits_per_symbol,):
        raise ValueError(
            f"expected {cst.bits_per_symbol} bits, got shape {bits.shape}"
        )
    if np.any((bits != 0) & (bits != 1)):
        raise ValueError("bits must be 0 or 1")
    idx = 0
    for b in bits:
        idx = (idx << 1) | int(b)
    return idx


def map_bits(cst: LayeredConstellation, bits) -> complex:
    """Map a 2P-bit label (string or sequence) to its constellation point."""
    return complex(cst.points[_as_label_index(cst, bits)])


def split_layers(cst: LayeredConstellation, bits) -> np.ndarray:
    """Per-layer offsets of a label; they sum exactly to map_bits(cst, bits)."""
    idx = _as_label_index(cst, bits)
    shifts = 2 * (cst.layers - 1 - np.arange(cst.layers))
    subs = (idx >> shifts) & 0b11
    return np.array(
        [cst.layer_centroids[p][subs[p]] for p in range(cst.layers)]
    )


def hard_demap(points: np.ndarray, z, scale: float = 1.0) -> np.ndarray:
    """Label index of the nearest point to z under |z - scale*c|^2.

    Works on scalars or arrays of z; ties resolve to the lowest label
    index.  points must be label-indexed (as produced by build_hqam or
    standard_qam16, or a layer_centroids entry).
    """
    if scale <= 0:
        raise ValueError("scale must be > 0")
    z = np.asarray(z)
    d2 = np.abs(z[..., None] - scale * points) ** 2
    return np.argmin(d2, axis=-1)


def map_bit_matrix(points: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """Vectorized label mapping: bit array (..., n_bits) -> points (...)."""
    n_bits = int(np.log2(len(points)))
    weights = 1 << np.arange(n_bits - 1, -1, -1)
    idx = np.tensordot(bits.astype(np.int64), weights, axes=([-1], [0]))
    return points[idx]


def labels_to_bits(idx: np.ndarray, n_bits: int) -> np.ndarray:
    """Label indices (...) -> bit array (..., n_bits), MSB first."""
    idx = np.asarray(idx)
    shifts = np.arange(n_bits - 1, -1, -1)
    return ((idx[..., None] >> shifts) & 1).astype(np.uint8)
