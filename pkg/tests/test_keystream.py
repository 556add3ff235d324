"""Noise-vector extraction and the bit-permutation machinery."""

import random

import pytest

from tentbreak import keystream, tentmap
from tentbreak.backend import ParameterError, get_backend
from tentbreak.keystream import BitPermutation, DEFAULT_TABLE, QuarterPermTable

FP = get_backend("fp62")


def fp(num, den):
    return FP.from_ratio(num, den)


def test_threshold_bit():
    half = fp(1, 2)
    assert keystream.threshold_bit(fp(1, 4), half) == 0
    assert keystream.threshold_bit(fp(3, 4), half) == 1
    assert keystream.threshold_bit(half, half) == 0       # equality -> 0
    assert keystream.threshold_bit(FP.one, fp(9, 10)) == 1


def test_bits_to_block_msb_first():
    assert keystream.bits_to_block([1, 0, 1, 0, 1, 0, 1, 0]) == 0b10101010
    assert keystream.bits_to_block([0, 0, 0, 1]) == 1


def test_noise_vectors_golden():
    p = tentmap.TentParams(fp(2, 10), fp(7, 10))
    u = keystream.build_noise_vectors(fp(3, 10), p, 2, 3, FP)
    assert u == [0xDD, 0xFF, 0xFC, 0x9D]


def test_noise_vectors_steep_map():
    # alpha = 0.9, x0 = 0.95: first step crosses the peak downward
    p = tentmap.TentParams(fp(9, 10), fp(7, 10))
    u = keystream.build_noise_vectors(fp(19, 20), p, 2, 0, FP)
    assert u == [0x81]


def test_noise_vector_bit_bias_tracks_alpha():
    # under the uniform invariant density Prob{bit = 0} = alpha
    for a_num in (1, 3):
        p = tentmap.TentParams(fp(a_num, 10), fp(7, 10))
        u = keystream.build_noise_vectors(fp(123, 1000), p, 2, 2499, FP)
        ones = sum(bin(v).count("1") for v in u)
        freq = ones / (8 * len(u))
        assert abs(freq - (1 - a_num / 10)) < 0.03


def test_mended_extraction_is_balanced():
    p = tentmap.TentParams(fp(1, 10), fp(7, 10))
    u = keystream.build_noise_vectors(fp(3, 10), p, 2, 999, FP, mended=True)
    ones = sum(bin(v).count("1") for v in u)
    assert 0.45 < ones / (8 * len(u)) < 0.55


def test_compute_vj():
    assert keystream.compute_vj(0xFF, 0x00) == 0xFF
    assert keystream.compute_vj(0xA7, 0xA7) == 0
    assert keystream.compute_vj(0b10101010, 0b11110000) == 0b01011010


def test_default_table_valid():
    assert len(DEFAULT_TABLE.entries) == 16
    assert DEFAULT_TABLE.entries[0] == (1, 2, 3, 4)
    for e in DEFAULT_TABLE.entries:
        assert sorted(e) == [1, 2, 3, 4]


def test_table_file_roundtrip(tmp_path):
    path = tmp_path / "table.txt"
    DEFAULT_TABLE.save(path)
    loaded = QuarterPermTable.load(path)
    assert loaded.entries == DEFAULT_TABLE.entries


def test_table_rejects_bad_entries():
    with pytest.raises(ParameterError):
        QuarterPermTable([(1, 2, 3, 4)] * 15)
    bad = [(1, 2, 3, 4)] * 15 + [(1, 1, 3, 4)]
    with pytest.raises(ParameterError):
        QuarterPermTable(bad)


def test_fji_identity_shuffle_is_rotation():
    # table entry 0 keeps the quarters in place, leaving the <<< 1
    f = keystream.build_fji(0, DEFAULT_TABLE, 2)
    assert f.dest == tuple((i + 1) % 8 for i in range(8))


def test_fji_quarter_swap_matches_direct_evaluation():
    # w = (2,1,3,4): swap the two most significant quarters, then rotate
    table = QuarterPermTable([(2, 1, 3, 4)] * 16)
    f = keystream.build_fji(5, table, 2)
    for x in range(256):
        m1, m2, low = (x >> 6) & 3, (x >> 4) & 3, x & 0xF
        shuffled = (m2 << 6) | (m1 << 4) | low
        rotated = ((shuffled << 1) | (shuffled >> 7)) & 0xFF
        assert keystream.apply(f, x) == rotated


def test_fj_single_nibble_case():
    # n = 1: f_j is a single quarter shuffle plus rotation
    for v in range(16):
        a = keystream.compose_fj(v, DEFAULT_TABLE, 1)
        b = keystream.build_fji(v, DEFAULT_TABLE, 1)
        assert a.dest == b.dest


def test_fj_identity_selectors_rotate_twice():
    f = keystream.compose_fj(0x00, DEFAULT_TABLE, 2)
    assert f.dest == tuple((i + 2) % 8 for i in range(8))


def test_fj_golden():
    f = keystream.compose_fj(0x4B, DEFAULT_TABLE, 2)
    assert f.dest == (0, 1, 6, 3, 4, 7, 2, 5)
    assert keystream.apply(f, 0x01) == 0x01
    assert keystream.apply(f, 0x80) == 0x20


def test_fj_matches_stepwise_application():
    # composing then applying equals applying the nibble steps in turn
    rng = random.Random(11)
    for _ in range(25):
        vj = rng.randrange(256)
        f = keystream.compose_fj(vj, DEFAULT_TABLE, 2)
        for x in (0, 0xFF, rng.randrange(256)):
            y = keystream.apply(keystream.build_fji((vj >> 4) & 0xF, DEFAULT_TABLE, 2), x)
            y = keystream.apply(keystream.build_fji(vj & 0xF, DEFAULT_TABLE, 2), y)
            assert keystream.apply(f, x) == y


def test_apply_single_bits():
    f = keystream.compose_fj(0x3C, DEFAULT_TABLE, 2)
    for i in range(8):
        out = keystream.apply(f, 1 << i)
        assert out == 1 << f.dest[i]
        assert bin(out).count("1") == 1


def test_invert_exhaustive():
    rng = random.Random(5)
    dest = list(range(8))
    rng.shuffle(dest)
    f = BitPermutation(tuple(dest), 2)
    finv = keystream.invert(f)
    for x in range(256):
        assert keystream.apply(finv, keystream.apply(f, x)) == x


def test_invert_rotation():
    rot1 = BitPermutation(tuple((i + 1) % 8 for i in range(8)), 2)
    assert keystream.invert(rot1).dest == tuple((i - 1) % 8 for i in range(8))


def test_compose_order():
    rng = random.Random(6)
    d1, d2 = list(range(8)), list(range(8))
    rng.shuffle(d1)
    rng.shuffle(d2)
    inner, outer = BitPermutation(tuple(d1), 2), BitPermutation(tuple(d2), 2)
    both = keystream.compose(outer, inner)
    for x in range(256):
        assert keystream.apply(both, x) == \
            keystream.apply(outer, keystream.apply(inner, x))


def test_bad_permutation_rejected():
    with pytest.raises(ParameterError):
        BitPermutation((0, 0, 1, 2), 1)
    with pytest.raises(ParameterError):
        keystream.compose_fj(0x100, DEFAULT_TABLE, 1)
