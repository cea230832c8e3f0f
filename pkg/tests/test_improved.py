from functools import partial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bsifkit.diffanalysis import verify_linear_relation
from bsifkit.icbsif import block_scramble, block_size
from bsifkit.image_core import ShapeError, pixel_sum, rotate90
from bsifkit.improved import (
    decrypt_improved,
    encrypt_improved,
    rotation_angles,
    scramble_rotate_group,
    unscramble_rotate_group,
)
from bsifkit.keystream import MasterKey, gen_latin_square

from conftest import random_image

perms = st.permutations([1, 2, 3, 4])


def test_rotation_angles_examples():
    assert rotation_angles((2, 4, 3, 1)) == (2, 2, -1, -2)
    assert rotation_angles((1, 2, 3, 4)) == (1, 1, 1, 1)
    with pytest.raises(ValueError):
        rotation_angles((1, 1, 2, 3))


@given(perms)
def test_rotation_angles_telescope(index):
    assert sum(rotation_angles(index)) % 4 == index[3] % 4


def test_group_vs_direct_composition(rng):
    X = random_image(rng, 16)
    O = gen_latin_square(5, 4)
    direct = X
    for t in (2, 2, -1, -2):
        direct = rotate90(block_scramble(direct, O, 4), t)
    assert np.array_equal(scramble_rotate_group(X, O, 4, (2, 4, 3, 1)), direct)


def test_group_with_cyclic_square():
    X = np.arange(16 * 16, dtype=np.int64).reshape(16, 16).astype(np.uint8)
    O = (np.arange(4)[:, None] + np.arange(4)[None, :]) % 4
    out = scramble_rotate_group(X, O, 4, (1, 2, 3, 4))
    direct = X
    for _ in range(4):
        direct = rotate90(block_scramble(direct, O, 4), 1)
    assert np.array_equal(out, direct)


@settings(max_examples=40, deadline=None)
@given(perms, st.integers(9, 30), st.integers(0, 2**32 - 1))
def test_group_roundtrip_and_sum(index, size, seed):
    rng = np.random.default_rng(seed)
    X = random_image(rng, size)
    L = block_size(size, size)
    O = gen_latin_square(seed, L)
    G = scramble_rotate_group(X, O, L, index)
    assert pixel_sum(G) == pixel_sum(X)
    assert np.array_equal(unscramble_rotate_group(G, O, L, index), X)


@pytest.mark.parametrize("m", [3, 4, 5])
@pytest.mark.parametrize("size", [16, 25])
def test_roundtrip_and_index_agreement(rng, m, size):
    for _ in range(5):
        P, K = random_image(rng, size), MasterKey.random(rng)
        enc_idx, dec_idx = [], []
        C = encrypt_improved(P, K, m, index_log=enc_idx)
        assert np.array_equal(decrypt_improved(C, K, m, index_log=dec_idx), P)
        assert enc_idx == dec_idx and len(enc_idx) == m


def test_beta_roundtrip(rng):
    P, K = random_image(rng, 16), MasterKey.random(rng)
    for beta in (0, 1, 7):
        assert np.array_equal(decrypt_improved(encrypt_improved(P, K, 3, beta), K, 3, beta), P)


def test_round_count_guard(rng):
    P, K = random_image(rng, 16), MasterKey.random(rng)
    with pytest.raises(ValueError, match="m >= 3"):
        encrypt_improved(P, K, 2)
    C = encrypt_improved(P, K, 1, allow_weak_rounds=True)
    assert np.array_equal(decrypt_improved(C, K, 1, allow_weak_rounds=True), P)
    with pytest.raises(ValueError):
        encrypt_improved(P, K, 0, allow_weak_rounds=True)
    with pytest.raises(ShapeError):
        encrypt_improved(np.zeros((16, 20), np.uint8), K, 3)


def test_fixed_index_restores_linearity(rng):
    K = MasterKey.random(rng)
    P0, P1, P2 = (random_image(rng, 25) for _ in range(3))
    fixed = partial(encrypt_improved, key=K, m=3, fixed_index=(2, 4, 3, 1))
    assert verify_linear_relation(P0, P1, P2, fixed).holds
    live = partial(encrypt_improved, key=K, m=3)
    assert not verify_linear_relation(P0, P1, P2, live).holds
