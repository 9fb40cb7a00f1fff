"""Structure, encoding, and decoding checks for the WiMAX LDPC codes."""

import numpy as np
import pytest

from hqmimo import wimax_ldpc as L


def test_code_dimensions():
    code = L.load_code("5/6", 2304)
    assert (code.n, code.k, code.m_b, code.z) == (2304, 1920, 4, 96)
    code = L.load_code("2/3A", 1152)
    assert (code.n, code.k, code.m_b, code.z) == (1152, 768, 8, 48)
    code = L.load_code("3/4A", 2304)
    assert (code.n, code.k, code.m_b, code.z) == (2304, 1728, 6, 96)
    code = L.load_code("1/2", 2304)
    assert (code.n, code.k, code.m_b, code.z) == (2304, 1152, 12, 96)


def test_rate_is_exact():
    for rid, num, den in [("1/2", 1, 2), ("2/3A", 2, 3), ("3/4A", 3, 4), ("5/6", 5, 6)]:
        for n in (1152, 2304):
            code = L.load_code(rid, n)
            assert code.k * den == code.n * num


def test_shift_scaling():
    full = L.load_code("2/3A", 2304)
    half = L.load_code("2/3A", 1152)
    b_full, b_half = full.base_matrix, half.base_matrix
    mask = b_full >= 0
    assert np.array_equal(b_half[mask], b_full[mask] * 48 // 96)
    assert np.all(b_half[~mask] == -1)


def test_load_rejects_bad_args():
    with pytest.raises(ValueError):
        L.load_code("7/8", 2304)
    with pytest.raises(ValueError):
        L.load_code("1/2", 2300)
    with pytest.raises(ValueError):
        L.load_code("1/2", 24 * 97)


@pytest.mark.parametrize("rate_id,n", [("2/3A", 1152), ("5/6", 1152), ("3/4A", 2304), ("1/2", 2304)])
def test_parity_check_full_rank(rate_id, n):
    code = L.load_code(rate_id, n)
    assert L.gf2_rank(L.expand_h(code)) == code.m


@pytest.mark.parametrize("rate_id,n", [("2/3A", 1152), ("5/6", 1152), ("3/4A", 2304)])
def test_encode_gives_zero_syndrome(rate_id, n):
    code = L.load_code(rate_id, n)
    rng = np.random.default_rng(11)
    info = rng.integers(0, 2, size=(64, code.k), dtype=np.uint8)
    cw = L.encode_batch(code, info)
    assert cw.shape == (64, code.n)
    assert np.array_equal(cw[:, : code.k], info)
    assert not L.syndrome_batch(code, cw).any()


def test_syndrome_matches_dense_oracle():
    code = L.load_code("2/3A", 1152)
    h = L.expand_h(code)
    rng = np.random.default_rng(3)
    words = rng.integers(0, 2, size=(32, code.n), dtype=np.uint8)
    expect = (words @ h.T % 2).astype(np.uint8)
    assert np.array_equal(L.syndrome_batch(code, words), expect)


def test_encoding_is_linear():
    code = L.load_code("5/6", 1152)
    rng = np.random.default_rng(5)
    a = rng.integers(0, 2, size=(16, code.k), dtype=np.uint8)
    b = rng.integers(0, 2, size=(16, code.k), dtype=np.uint8)
    assert np.array_equal(
        L.encode_batch(code, a ^ b), L.encode_batch(code, a) ^ L.encode_batch(code, b)
    )


def test_single_frame_wrappers():
    code = L.load_code("2/3A", 1152)
    rng = np.random.default_rng(9)
    info = rng.integers(0, 2, size=code.k, dtype=np.uint8)
    cw = L.encode(code, info)
    assert not L.syndrome(code, cw).any()
    out = L.decode(code, (1.0 - 2.0 * cw) * 20.0)
    assert out.converged
    assert out.iterations == 0
    assert np.array_equal(out.hard_bits, cw)
    assert np.array_equal(out.info_bits, info)


@pytest.mark.parametrize("algorithm", ["sum_product", "min_sum"])
def test_decode_corrects_flipped_bits(algorithm):
    code = L.load_code("2/3A", 1152)
    rng = np.random.default_rng(21)
    info = rng.integers(0, 2, size=(20, code.k), dtype=np.uint8)
    cw = L.encode_batch(code, info)
    llr = (1.0 - 2.0 * cw) * 8.0
    for row in llr:
        flips = rng.choice(code.n, size=12, replace=False)
        row[flips] *= -1.0
    hard, iters, conv = L.decode_batch(code, llr, algorithm=algorithm)
    assert conv.all()
    assert (iters >= 1).all()
    assert np.array_equal(hard, cw)


def test_decode_noisy_waterfall():
    # Rate 2/3 at 3 dB Eb/N0 over AWGN should decode essentially always,
    # while 0 dB should essentially always fail.
    code = L.load_code("2/3A", 1152)
    rng = np.random.default_rng(17)

    def run(ebn0_db, frames):
        sigma2 = 10 ** (-ebn0_db / 10) / (2 * code.rate)
        info = rng.integers(0, 2, size=(frames, code.k), dtype=np.uint8)
        cw = L.encode_batch(code, info)
        y = (1.0 - 2.0 * cw) + rng.normal(0.0, np.sqrt(sigma2), size=cw.shape)
        hard, _, _ = L.decode_batch(code, 2.0 * y / sigma2)
        return np.mean((hard != cw).any(axis=1))

    assert run(3.0, 60) == 0.0
    assert run(0.0, 60) > 0.9


def test_decode_rejects_bad_input():
    code = L.load_code("2/3A", 1152)
    llr = np.zeros((2, code.n))
    llr[0, 0] = np.inf
    with pytest.raises(ValueError):
        L.decode_batch(code, llr)
    with pytest.raises(ValueError):
        L.decode_batch(code, np.zeros((2, code.n - 1)))
    with pytest.raises(ValueError):
        L.decode_batch(code, np.zeros((2, code.n)), algorithm="bogus")


def test_unconverged_frames_are_flagged():
    code = L.load_code("2/3A", 1152)
    rng = np.random.default_rng(2)
    llr = rng.normal(0.0, 1.0, size=(8, code.n))
    hard, iters, conv = L.decode_batch(code, llr, max_iter=3)
    assert hard.shape == (8, code.n)
    assert np.all(iters[~conv] == 3)
    syn = L.syndrome_batch(code, hard)
    assert np.array_equal(conv, ~syn.any(axis=1))
