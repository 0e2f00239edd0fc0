import itertools

import numpy as np
import pytest

from rsnoum.waveform import MCS_TABLE, FrameConfig, PolarCode, polar_code, stream_code
from rsnoum.waveform.polar import CRC11_POLY, crc_attach, crc_check, ga_reliability, polar_transform


def _crc_by_division(bits):
    # Remainder of bits(x) * x^11 modulo the generator, via integer long division.
    poly = int("".join(map(str, CRC11_POLY)), 2)
    value = int("".join(map(str, bits)), 2) << 11 if len(bits) else 0
    for shift in range(value.bit_length() - 12, -1, -1):
        if value >> (shift + 11) & 1:
            value ^= poly << shift
    return [(value >> (10 - i)) & 1 for i in range(11)]


def _generator(n):
    g = np.array([[1]], dtype=np.uint8)
    while g.shape[0] < n:
        g = np.kron(np.array([[1, 0], [1, 1]], dtype=np.uint8), g)
    return g


def test_crc_matches_long_division():
    rng = np.random.default_rng(0)
    for size in (1, 7, 64, 300):
        bits = rng.integers(0, 2, size, dtype=np.uint8)
        assert list(crc_attach(bits)[size:]) == _crc_by_division(list(bits))
        assert crc_check(crc_attach(bits))


def test_crc_detects_single_flips():
    bits = crc_attach(np.random.default_rng(1).integers(0, 2, 100, dtype=np.uint8))
    for i in range(bits.size):
        flipped = bits.copy()
        flipped[i] ^= 1
        assert not crc_check(flipped)


@pytest.mark.parametrize("n", [2, 8, 64])
def test_transform_is_kronecker_product(n):
    rng = np.random.default_rng(n)
    u = rng.integers(0, 2, n, dtype=np.uint8)
    assert np.array_equal(polar_transform(u), (u @ _generator(n)) % 2)
    assert np.array_equal(polar_transform(polar_transform(u)), u)


def test_ga_reliability_two_by_two():
    means = np.array([2.0, 2.0])
    left, right = ga_reliability(means)
    assert right == pytest.approx(4.0)
    assert 0 < left < 2.0


def test_exhaustive_minimum_distance_small_code():
    code = PolarCode(16, 4, crc_len=0)
    g = _generator(16)
    weights = [int(g[i].sum()) for i in code.info_idx]
    codewords = {tuple(code.encode(np.array(msg, dtype=np.uint8)))
                 for msg in itertools.product([0, 1], repeat=4)}
    assert len(codewords) == 16
    d_min = min(sum(c) for c in codewords if any(c))
    # polar codes: d_min equals the lightest generator row among the information rows
    assert d_min == min(weights)
    base = code.encode(np.zeros(4, dtype=np.uint8))
    for i in range(4):
        msg = np.zeros(4, dtype=np.uint8)
        msg[i] = 1
        assert np.sum(code.encode(msg) != base) >= d_min


def _sc_reference(llr, frozen):
    """Plain recursive min-sum SC decoder over the natural-order transform."""
    n = llr.size
    if n == 1:
        bit = 0 if frozen[0] or llr[0] >= 0 else 1
        return np.array([bit], dtype=np.uint8), np.array([bit], dtype=np.uint8)
    a, b = llr[: n // 2], llr[n // 2:]
    f = np.sign(a) * np.sign(b) * np.minimum(np.abs(a), np.abs(b))
    u_left, x_left = _sc_reference(f, frozen[: n // 2])
    g = b + (1 - 2 * x_left.astype(float)) * a
    u_right, x_right = _sc_reference(g, frozen[n // 2:])
    return np.concatenate([u_left, u_right]), np.concatenate([x_left ^ x_right, x_right])


@pytest.mark.parametrize("n,k", [(64, 20), (100, 40), (256, 128)])
def test_list_one_matches_reference_sc(n, k):
    code = PolarCode(n, k, crc_len=0, list_size=1)
    rng = np.random.default_rng(n + k)
    for _ in range(30):
        llr = rng.normal(1.0, 2.0, n)
        full = np.concatenate([llr, np.full(code.mother_n - n, 1e12)])
        u_ref, _ = _sc_reference(full, code.frozen)
        bits, _ = code.decode(llr)
        assert np.array_equal(bits, u_ref[code.info_idx])


def test_shortened_tail_is_zero():
    code = PolarCode(100, 30, crc_len=0)
    u = np.zeros(code.mother_n, dtype=np.uint8)
    rng = np.random.default_rng(2)
    u[code.info_idx] = rng.integers(0, 2, code.info_idx.size)
    assert not np.any(polar_transform(u)[100:])
    assert np.all(code.info_idx < 100)


@pytest.mark.parametrize("mcs", MCS_TABLE, ids=lambda m: str(m.index))
def test_noiseless_roundtrip_every_mcs(mcs):
    code = stream_code(mcs, FrameConfig())
    bits = np.random.default_rng(mcs.index).integers(0, 2, code.k, dtype=np.uint8)
    cw = code.encode(bits)
    assert cw.size == FrameConfig().coded_bits(mcs)
    decoded, ok = code.decode(20.0 * (1 - 2 * cw.astype(float)))
    assert ok and np.array_equal(decoded, bits)


def test_list_decoder_corrects_noise():
    code = polar_code(2400, 1189)
    rng = np.random.default_rng(4)
    hits = 0
    for _ in range(20):
        bits = rng.integers(0, 2, code.k, dtype=np.uint8)
        x = 1 - 2 * code.encode(bits).astype(float)
        sigma2 = 10 ** -0.1  # Es/N0 = 1 dB, BPSK on the real axis
        y = x + rng.normal(0, np.sqrt(sigma2 / 2), x.size)
        decoded, ok = code.decode(4 * y / sigma2)
        hits += ok and np.array_equal(decoded, bits)
    assert hits >= 19


def test_erasures_never_succeed():
    code = polar_code(2400, 1189)
    decoded, ok = code.decode(np.zeros(2400))
    rng = np.random.default_rng(5)
    payloads = rng.integers(0, 2, (1000, code.k), dtype=np.uint8)
    successes = sum(ok and np.array_equal(decoded, p) for p in payloads)
    assert successes / 1000 < 0.01


def test_invalid_parameters():
    with pytest.raises(ValueError):
        PolarCode(16, 8, crc_len=5)
    with pytest.raises(ValueError):
        PolarCode(16, 10, crc_len=11)
    with pytest.raises(ValueError):
        polar_code(64, 20).encode(np.zeros(19))
    with pytest.raises(ValueError):
        polar_code(64, 20).decode(np.zeros(63))
