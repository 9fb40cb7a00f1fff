"""Layered constellation construction, labeling, and demapping checks."""

import numpy as np
import pytest

from hqmimo import constellation as C


def test_two_layer_energies_d2():
    cst = C.build_hqam(C.HqamParams(2, (2.0,)))
    assert abs(cst.layer_energy[0] - 0.8) < 1e-12
    assert abs(cst.layer_energy[1] - 0.2) < 1e-12


def test_two_layer_energies_d4():
    cst = C.build_hqam(C.HqamParams(2, (4.0,)))
    assert abs(cst.layer_energy[0] - 16 / 17) < 1e-12
    assert abs(cst.layer_energy[1] - 1 / 17) < 1e-12


@pytest.mark.parametrize("ratios", [(2.0,), (4.0,), (1.9,), (8.0,), (2.0, 2.0)])
def test_unit_average_power(ratios):
    cst = C.build_hqam(C.HqamParams(len(ratios) + 1, ratios))
    assert abs(np.mean(np.abs(cst.points) ** 2) - 1.0) < 1e-12
    assert abs(cst.layer_energy.sum() - 1.0) < 1e-12


def test_three_layer_energies():
    cst = C.build_hqam(C.HqamParams(3, (2.0, 2.0)))
    expect = np.array([16, 4, 1]) / 21
    assert np.allclose(cst.layer_energy, expect, atol=1e-12)


def test_min_distance_ratios_hold():
    cst = C.build_hqam(C.HqamParams(3, (2.0, 4.0)))
    d = cst.layer_min_distance
    assert abs(d[0] / d[1] - 2.0) < 1e-12
    assert abs(d[1] / d[2] - 4.0) < 1e-12


def test_points_sum_of_layer_offsets():
    # every composite point must equal the sum of its per-layer offsets
    cst = C.build_hqam(C.HqamParams(2, (1.9,)))
    for idx in range(16):
        bits = [(idx >> k) & 1 for k in (3, 2, 1, 0)]
        parts = C.split_layers(cst, bits)
        assert abs(parts.sum() - cst.points[idx]) < 1e-12
        assert abs(C.map_bits(cst, bits) - cst.points[idx]) < 1e-12


def test_quadrant_sign_table():
    offs = C.quadrant_offsets(1.0)
    assert offs[0b00] == 1 + 1j
    assert offs[0b01] == 1 - 1j
    assert offs[0b11] == -1 - 1j
    assert offs[0b10] == -1 + 1j


def test_first_bit_flips_inphase_sign():
    cst = C.build_hqam(C.HqamParams(2, (2.0,)))
    # base label 00 vs 10: only the I sign of the base offset changes
    a = C.split_layers(cst, "0000")[0]
    b = C.split_layers(cst, "1000")[0]
    assert a.real == -b.real and a.imag == b.imag


def test_map_bits_accepts_string_labels():
    cst = C.build_hqam(C.HqamParams(2, (2.0,)))
    assert C.map_bits(cst, "0101") == cst.points[0b0101]


def test_bad_params_rejected():
    with pytest.raises(ValueError):
        C.HqamParams(0, ())
    with pytest.raises(ValueError):
        C.HqamParams(2, ())
    with pytest.raises(ValueError):
        C.HqamParams(2, (-1.0,))
    cst = C.build_hqam(C.HqamParams(2, (2.0,)))
    with pytest.raises(ValueError):
        C.map_bits(cst, "01")
    with pytest.raises(ValueError):
        C.map_bits(cst, [0, 1, 2, 0])


def test_d2_point_set_is_gray_16qam():
    mine = np.sort_complex(C.build_hqam(C.HqamParams(2, (2.0,))).points)
    ref = np.sort_complex(C.standard_qam16())
    assert np.max(np.abs(mine - ref)) < 1e-12


def test_standard_qam16_gray_labels():
    pts = C.standard_qam16() * np.sqrt(10.0)
    # label bits are (I sign, Q sign, I magnitude, Q magnitude)
    assert pts[0b0000] == 3 + 3j
    assert pts[0b0010] == 1 + 3j
    assert pts[0b1000] == -3 + 3j
    assert pts[0b1110] == -1 - 3j
    assert pts[0b0101] == 3 - 1j
    assert abs(np.mean(np.abs(C.standard_qam16()) ** 2) - 1.0) < 1e-12


def test_bit_subsets_partition():
    ones = C.bit_subsets(4)
    assert ones.shape == (4, 16)
    assert ones.sum(axis=1).tolist() == [8, 8, 8, 8]
    assert ones[0, 0b1000] and not ones[0, 0b0111]
    assert ones[3, 0b0001] and not ones[3, 0b1110]


def test_hard_demap_nearest_and_ties():
    pts = C.standard_qam16()
    idx = C.hard_demap(pts, pts[7])
    assert idx == 7
    noisy = pts[np.array([3, 12])] + 0.01 * (1 + 1j)
    assert C.hard_demap(pts, noisy).tolist() == [3, 12]
    # equidistant from every point: lowest label index wins
    assert C.hard_demap(np.array([1 + 0j, -1 + 0j]), 0.0) == 0
    with pytest.raises(ValueError):
        C.hard_demap(pts, 0.0, scale=0.0)


def test_hard_demap_scale():
    pts = C.standard_qam16()
    scaled = 0.3 * pts[5]
    assert C.hard_demap(pts, scaled, scale=0.3) == 5


def test_label_bit_round_trip():
    rng = np.random.default_rng(3)
    idx = rng.integers(0, 16, size=(5, 7))
    bits = C.labels_to_bits(idx, 4)
    assert bits.shape == (5, 7, 4)
    weights = np.array([8, 4, 2, 1])
    assert np.array_equal(np.tensordot(bits, weights, axes=([-1], [0])), idx)


def test_map_bit_matrix_matches_scalar_map():
    cst = C.build_hqam(C.HqamParams(2, (2.0,)))
    rng = np.random.default_rng(4)
    bits = rng.integers(0, 2, size=(20, 4))
    vec = C.map_bit_matrix(cst.points, bits)
    ref = [C.map_bits(cst, b) for b in bits]
    assert np.allclose(vec, ref, atol=0)
