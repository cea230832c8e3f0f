"""The four-round block-scrambling / image-filtering cipher (IC-BSIF).

Each round: block scrambling with a Latin square, a 90 degree clockwise
rotation, normalization (modular addition of a key matrix) and causal 3x3
filtering. Decryption runs the inverse stages in reverse order.
"""

from __future__ import annotations

import graphlib
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np

from . import _kernels
from .image_core import ShapeError, as_image, mod_add, mod_sub, rotate90
from .keystream import (
    DEFAULT_SCHEDULE,
    KeySchedule,
    MasterKey,
    derive_subkeys,
    gen_latin_square,
    gen_mask,
    gen_norm_matrix,
    is_latin_square,
)

ROUNDS = 4
MIN_SIDE = 9


def block_size(m: int, n: int) -> int:
    """``L = min(floor(sqrt(M)), floor(sqrt(N)))``."""
    if m < 1 or n < 1:
        raise ValueError("dimensions must be >= 1")
    return min(isqrt(m), isqrt(n))


# --- block scrambling ----------------------------------------------------------

@lru_cache(maxsize=128)
def _scramble_maps(square_bytes: bytes, L: int) -> tuple[np.ndarray, np.ndarray]:
    """Flat source/destination indices inside the L^2 x L^2 region."""
    O = np.frombuffer(square_bytes, dtype=np.int64).reshape(L, L)
    if not is_latin_square(O):
        raise ValueError("scrambling box is not a Latin square")
    bi, bj, u, v = np.meshgrid(*(np.arange(L),) * 4, indexing="ij")
    side = L * L
    src = (bi * L + u) * side + (bj * L + v)
    dst_row = bi * L + v
    dst_col = bj * L + O[(u + bi) % L, (v + bj) % L]
    dst = dst_row * side + dst_col
    return src.ravel(), dst.ravel()


def _scramble_region(img, O, L):
    img = as_image(img)
    O = np.ascontiguousarray(O, dtype=np.int64)
    if O.shape != (L, L):
        raise ValueError(f"Latin square must be {L}x{L}, got {O.shape}")
    side = L * L
    if side > img.shape[0] or side > img.shape[1]:
        raise ShapeError(f"scrambling region {side}x{side} exceeds image {img.shape}")
    src, dst = _scramble_maps(O.tobytes(), L)
    return img, side, src, dst


def block_scramble(img, O, L: int) -> np.ndarray:
    """Permute pixels within each LxL block of the top-left L^2 x L^2 region.

    Intra-block position ``(u, v)`` of block ``(i, j)`` moves to
    ``(v, O[(u + i) % L, (v + j) % L])``. Pixels outside the region stay put.
    """
    img, side, src, dst = _scramble_region(img, O, L)
    out = img.copy()
    region = img[:side, :side].ravel()
    flat = np.empty_like(region)
    flat[dst] = region[src]
    out[:side, :side] = flat.reshape(side, side)
    return out


def block_unscramble(img, O, L: int) -> np.ndarray:
    img, side, src, dst = _scramble_region(img, O, L)
    out = img.copy()
    region = img[:side, :side].ravel()
    flat = np.empty_like(region)
    flat[src] = region[dst]
    out[:side, :side] = flat.reshape(side, side)
    return out


# --- normalization ---------------------------------------------------------------

def normalize(img, Q) -> np.ndarray:
    return mod_add(img, Q)


def denormalize(img, Q) -> np.ndarray:
    return mod_sub(img, Q)


# --- filtering -----------------------------------------------------------------

def _check_mask(W) -> np.ndarray:
    W = np.asarray(W, dtype=np.int64)
    if W.shape != (3, 3):
        raise ValueError(f"mask must be 3x3, got {W.shape}")
    if W[2, 2] != 1:
        raise ValueError("mask anchor weight w(3,3) must be 1")
    return W


def _check_filter_shape(img):
    if img.shape[0] < 3 or img.shape[1] < 3:
        raise ShapeError(f"filtering needs at least a 3x3 image, got {img.shape}")


def filter_image(n_img, W) -> np.ndarray:
    """Causal 3x3 modular filter, scanned row-major from the top-left pixel.

    ``c(x, y) = n(x, y) + sum of w * c over the eight upper/left neighbours``
    (mod 256). Neighbours outside the image read the normalized input with
    wrap-around, i.e. the lowermost rows and rightmost columns.
    """
    n_img = as_image(n_img)
    _check_filter_shape(n_img)
    return _kernels.filter_kernel(n_img, _check_mask(W))


def unfilter_image(c_img, W) -> np.ndarray:
    """Inverse of :func:`filter_image`.

    Interior pixels are recovered directly from the ciphertext; border pixels
    whose wrapped neighbours are themselves unknowns are solved in
    dependency order.
    """
    c_img = as_image(c_img)
    _check_filter_shape(c_img)
    W = _check_mask(W)
    offsets = tuple((i - 2, j - 2) for i in range(3) for j in range(3) if (i, j) != (2, 2) and W[i, j])
    try:
        order = _kernels.border_order(*c_img.shape, offsets)
    except graphlib.CycleError:
        raise ShapeError(
            f"image {c_img.shape} is too small to invert the filter for this mask "
            "(border pixels depend on each other cyclically)"
        ) from None
    return _kernels.unfilter_kernel(c_img, W, order)


# --- rounds --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RoundContext:
    """Key material for one round."""

    index: int
    subkey: int
    O: np.ndarray
    Q: np.ndarray
    W: np.ndarray
    L: int

    @classmethod
    def from_subkey(cls, index: int, subkey: int, shape: tuple[int, int],
                    schedule: KeySchedule = DEFAULT_SCHEDULE) -> "RoundContext":
        m, n = shape
        L = block_size(m, n)
        return cls(
            index=index,
            subkey=subkey,
            O=gen_latin_square(subkey, L, schedule.scramble_tag),
            Q=gen_norm_matrix(subkey, m, n, schedule.normalize_tag),
            W=gen_mask(subkey, schedule.mask_tag),
            L=L,
        )


def round_contexts(key: MasterKey, shape, rounds: int = ROUNDS,
                   schedule: KeySchedule = DEFAULT_SCHEDULE) -> list[RoundContext]:
    return [RoundContext.from_subkey(i + 1, k, shape, schedule)
            for i, k in enumerate(derive_subkeys(key, rounds))]


def check_cipher_shape(img) -> np.ndarray:
    img = as_image(img)
    m, n = img.shape
    if m != n:
        raise ShapeError(f"the cipher needs a square image (M = N), got {m}x{n}")
    if m < MIN_SIDE:
        raise ShapeError(f"the cipher needs images of at least {MIN_SIDE}x{MIN_SIDE}, got {m}x{n}")
    return img


def encrypt_round(img, ctx: RoundContext) -> np.ndarray:
    s = block_scramble(img, ctx.O, ctx.L)
    r = rotate90(s, 1)
    n = normalize(r, ctx.Q)
    return filter_image(n, ctx.W)


def decrypt_round(img, ctx: RoundContext) -> np.ndarray:
    n = unfilter_image(img, ctx.W)
    r = denormalize(n, ctx.Q)
    s = rotate90(r, -1)
    return block_unscramble(s, ctx.O, ctx.L)


def encrypt(P, key: MasterKey, schedule: KeySchedule = DEFAULT_SCHEDULE,
            return_rounds: bool = False):
    """Encrypt a square grayscale image with four rounds.

    With ``return_rounds`` the list of per-round outputs C1..C4 is returned
    instead of just the ciphertext.
    """
    img = check_cipher_shape(P)
    outputs = []
    for ctx in round_contexts(key, img.shape, ROUNDS, schedule):
        img = encrypt_round(img, ctx)
        outputs.append(img)
    return outputs if return_rounds else img


def decrypt(C, key: MasterKey, schedule: KeySchedule = DEFAULT_SCHEDULE) -> np.ndarray:
    img = check_cipher_shape(C)
    for ctx in reversed(round_contexts(key, img.shape, ROUNDS, schedule)):
        img = decrypt_round(img, ctx)
    return img
