"""Hardened variant: plaintext-dependent rotation schedule.

Every round first runs a group of four (block scramble, rotate) steps whose
rotation amounts come from a logistic-map index seeded with the pixel sum of
the round input, then normalizes and filters as in the original cipher.

Decryption works because scrambling and rotation only permute pixels: after
unfiltering and denormalizing round i, the pixel sum of the recovered image
equals the pixel sum of the round input, so the same index can be rederived
before the group is undone.
"""

from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from .icbsif import (
    RoundContext,
    block_scramble,
    block_unscramble,
    check_cipher_shape,
    denormalize,
    filter_image,
    normalize,
    round_contexts,
    unfilter_image,
)
from .image_core import pixel_sum, rotate90
from .keystream import DEFAULT_SCHEDULE, KeySchedule, MasterKey, logistic_rotation_index

log = logging.getLogger(__name__)

DEFAULT_ROUNDS = 4
MIN_ROUNDS = 3


class SumInvarianceError(AssertionError):
    """The pixel sum recovered during decryption does not match encryption."""


def rotation_angles(index: Sequence[int]) -> tuple[int, int, int, int]:
    """Signed quarter turns ``alpha_i - alpha_{i-1}`` with ``alpha_0 = 0``."""
    if sorted(index) != [1, 2, 3, 4]:
        raise ValueError(f"rotation index must be a permutation of 1..4, got {tuple(index)}")
    prev = 0
    turns = []
    for a in index:
        turns.append(a - prev)
        prev = a
    return tuple(turns)


def scramble_rotate_group(img, O, L, index) -> np.ndarray:
    for t in rotation_angles(index):
        img = rotate90(block_scramble(img, O, L), t)
    return img


def unscramble_rotate_group(img, O, L, index) -> np.ndarray:
    for t in reversed(rotation_angles(index)):
        img = block_unscramble(rotate90(img, -t), O, L)
    return img


def _check_rounds(m: int, allow_weak_rounds: bool):
    if m < 1:
        raise ValueError("round count must be >= 1")
    if m < MIN_ROUNDS and not allow_weak_rounds:
        raise ValueError(f"the improved cipher needs m >= {MIN_ROUNDS} rounds (pass allow_weak_rounds to override)")


def encrypt_improved(P, key: MasterKey, m: int = DEFAULT_ROUNDS, beta: int = 0, *,
                     allow_weak_rounds: bool = False,
                     schedule: KeySchedule = DEFAULT_SCHEDULE,
                     fixed_index: Sequence[int] | None = None,
                     return_rounds: bool = False,
                     index_log: list | None = None):
    """Encrypt with ``m`` rounds.

    ``fixed_index`` bypasses the logistic-map derivation (every round uses the
    given index); it exists to show that the plaintext dependence, not the
    extra rotations, is what breaks linearity. ``index_log`` collects the
    per-round indices when given a list.
    """
    _check_rounds(m, allow_weak_rounds)
    img = check_cipher_shape(P)
    outputs = []
    for ctx in round_contexts(key, img.shape, m, schedule):
        index = _round_index(ctx, img, beta, fixed_index)
        if index_log is not None:
            index_log.append(index)
        g = scramble_rotate_group(img, ctx.O, ctx.L, index)
        img = filter_image(normalize(g, ctx.Q), ctx.W)
        outputs.append(img)
    return outputs if return_rounds else img


def decrypt_improved(C, key: MasterKey, m: int = DEFAULT_ROUNDS, beta: int = 0, *,
                     allow_weak_rounds: bool = False,
                     schedule: KeySchedule = DEFAULT_SCHEDULE,
                     fixed_index: Sequence[int] | None = None,
                     index_log: list | None = None) -> np.ndarray:
    _check_rounds(m, allow_weak_rounds)
    img = check_cipher_shape(C)
    indices = []
    for ctx in reversed(round_contexts(key, img.shape, m, schedule)):
        g = denormalize(unfilter_image(img, ctx.W), ctx.Q)
        # g is a permutation of the round input, so its sum seeds the same index
        index = _round_index(ctx, g, beta, fixed_index)
        indices.append(index)
        img = unscramble_rotate_group(g, ctx.O, ctx.L, index)
        if pixel_sum(img) != pixel_sum(g):
            raise SumInvarianceError(f"round {ctx.index}: pixel sum changed while undoing the group")
    indices.reverse()
    log.debug("decryption rotation indices: %s", indices)
    if index_log is not None:
        index_log.extend(indices)
    return img


def _round_index(ctx: RoundContext, img, beta, fixed_index):
    if fixed_index is not None:
        return tuple(fixed_index)
    return logistic_rotation_index(ctx.subkey, pixel_sum(img), beta)
