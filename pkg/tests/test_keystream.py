import itertools
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bsifkit.keystream import (
    KEY_ENV_VAR,
    MasterKey,
    derive_subkeys,
    gen_latin_square,
    gen_mask,
    gen_norm_matrix,
    is_latin_square,
    keyed_byte_stream,
    logistic_rotation_index,
    stream_bytes,
)

subkeys = st.integers(0, 2**32 - 1)


# Independent oracle: exact rational arithmetic, rounded to the nearest
# binary64 after every operation (int/int division in Python rounds correctly).
def _rnd(fr):
    return Fraction(fr.numerator / fr.denominator) if isinstance(fr, Fraction) else Fraction(fr)


def logistic_trace(v, steps):
    x = _rnd(Fraction(v + 1, 2**32 + 2))
    out = []
    for _ in range(steps):
        x = _rnd(_rnd(4 * x) * _rnd(1 - x))
        out.append(x)
    return out


def oracle_bytes(v, count):
    return [min(int(x * 256), 255) for x in logistic_trace(v, 100 + count)[100:]]


# frozen from the oracle above
SUBKEY0_TAG0 = [109, 250, 20, 74, 211, 147, 249, 24, 87, 230, 93, 237, 69, 202, 169, 229]
SUBKEY0_TAG1 = [189, 197, 181, 211, 147, 249, 23, 86, 228, 98, 241, 53, 168, 230, 91, 234]


def test_master_key_parsing(monkeypatch):
    hexkey = "AB" * 32
    assert MasterKey.from_hex(hexkey) == MasterKey.from_hex(hexkey.lower())
    with pytest.raises(ValueError, match="64 hex"):
        MasterKey.from_hex("ab" * 31)
    with pytest.raises(ValueError, match="non-hex"):
        MasterKey.from_hex("zz" * 32)
    monkeypatch.setenv(KEY_ENV_VAR, "01" * 32)
    assert MasterKey.from_env().raw == b"\x01" * 32


def test_derive_subkeys():
    assert derive_subkeys(MasterKey(bytes(32)), 4) == [0, 0, 0, 0]
    key = MasterKey(bytes(range(32)))
    ks = derive_subkeys(key, 9)
    assert ks[0] == 0x00010203 and ks[7] == 0x1C1D1E1F
    assert ks[8] == ks[0]
    assert derive_subkeys(key, 9) == ks
    with pytest.raises(ValueError):
        derive_subkeys(key, 0)


def test_stream_matches_oracle():
    assert list(itertools.islice(keyed_byte_stream(0, 0), 16)) == SUBKEY0_TAG0
    assert oracle_bytes(0, 16) == SUBKEY0_TAG0
    assert oracle_bytes(1 << 27, 16) == SUBKEY0_TAG1
    assert list(stream_bytes(0, 1, 16)) == SUBKEY0_TAG1
    assert SUBKEY0_TAG0 != SUBKEY0_TAG1


@given(subkeys, st.integers(0, 31))
def test_bulk_stream_equals_generator(k, tag):
    assert list(stream_bytes(k, tag, 40)) == list(itertools.islice(keyed_byte_stream(k, tag), 40))


@given(subkeys)
def test_stream_against_oracle_random_subkeys(k):
    assert list(stream_bytes(k, 2, 4)) == oracle_bytes(k ^ (2 << 27), 4)


@pytest.mark.parametrize("L", range(1, 23))
def test_latin_squares_valid(L):
    rng = np.random.default_rng(L)
    for k in rng.integers(0, 2**32, size=100):
        sq = gen_latin_square(int(k), L)
        assert is_latin_square(sq)
    assert gen_latin_square(0, 1).tolist() == [[0]]


def test_latin_square_deterministic():
    assert np.array_equal(gen_latin_square(1234, 8), gen_latin_square(1234, 8))
    assert not np.array_equal(gen_latin_square(1234, 8), gen_latin_square(1235, 8))


def test_is_latin_square_rejects():
    assert not is_latin_square([[0, 1], [0, 1]])


def test_norm_matrix():
    q = gen_norm_matrix(99, 5, 7)
    assert q.shape == (5, 7)
    assert np.array_equal(q, gen_norm_matrix(99, 5, 7))
    assert q.ravel().tolist() == list(stream_bytes(99, 1, 35))
    assert gen_norm_matrix(0, 4, 4).ravel()[0] == SUBKEY0_TAG1[0]


@given(subkeys)
def test_mask(k):
    w = gen_mask(k)
    assert w.shape == (3, 3) and w[2, 2] == 1
    assert w.ravel()[:8].tolist() == oracle_bytes(k ^ (2 << 27), 8)
    assert np.array_equal(w, gen_mask(k))


def test_rotation_index_fixed_value():
    # frozen from logistic_trace(0x9E3779B9, 104)
    samples = logistic_trace(0x9E3779B9, 104)[100:]
    assert sorted(samples) == samples
    assert logistic_rotation_index(0x9E3779B9, 0, 0) == (1, 2, 3, 4)


@given(subkeys, st.integers(0, 255 * 512 * 512), st.integers(0, 8))
def test_rotation_index_is_permutation(k, s, beta):
    idx = logistic_rotation_index(k, s, beta)
    assert sorted(idx) == [1, 2, 3, 4]
    assert idx == logistic_rotation_index(k, s, beta)


@given(subkeys, st.integers(0, 10**7))
def test_rotation_index_matches_oracle(k, s):
    samples = logistic_trace(k ^ (s % 2**32), 104)[100:]
    order = sorted(range(4), key=lambda i: samples[i])
    expected = [0] * 4
    for r, p in enumerate(order, 1):
        expected[p] = r
    assert logistic_rotation_index(k, s) == tuple(expected)


def test_rotation_index_beta_reduces_mod_2_32():
    assert logistic_rotation_index(5, 1, 32) == logistic_rotation_index(5, 0, 0)
    assert logistic_rotation_index(5, 3, 1) == logistic_rotation_index(5, 6, 0)


def test_rotation_index_sensitive_to_sum():
    rng = np.random.default_rng(3)
    changed = sum(
        logistic_rotation_index(int(k), int(s)) != logistic_rotation_index(int(k), int(s) + 1)
        for k, s in zip(rng.integers(0, 2**32, 50), rng.integers(0, 10**6, 50))
    )
    assert changed > 0

