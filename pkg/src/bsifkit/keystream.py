"""Key material: subkeys, Latin squares, normalization matrices, filter masks.

All randomness is drawn from the logistic map ``x <- 4x(1 - x)`` evaluated in
binary64. Any deterministic keyed generator works for the cipher's analysis;
this one is chosen for being short and reproducible.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numba
import numpy as np

from .image_core import F

KEY_ENV_VAR = "BSIFKIT_KEY"

WARMUP = 100
_TWO32 = 2**32

# domain tags for the three per-round generators
TAG_SCRAMBLE = 0
TAG_NORMALIZE = 1
TAG_MASK = 2


@dataclass(frozen=True)
class MasterKey:
    """A 256-bit master key."""

    raw: bytes

    def __post_init__(self):
        if len(self.raw) != 32:
            raise ValueError(f"master key must be 256 bits (32 bytes), got {len(self.raw)} bytes")

    @classmethod
    def from_hex(cls, text: str) -> "MasterKey":
        text = text.strip()
        if len(text) != 64:
            raise ValueError(f"master key must be 64 hex characters, got {len(text)}")
        try:
            return cls(bytes.fromhex(text))
        except ValueError:
            raise ValueError("master key contains non-hex characters") from None

    @classmethod
    def from_env(cls, var: str = KEY_ENV_VAR) -> "MasterKey":
        value = os.environ.get(var)
        if value is None:
            raise KeyError(f"environment variable {var} is not set")
        return cls.from_hex(value)

    @classmethod
    def random(cls, rng: np.random.Generator) -> "MasterKey":
        return cls(rng.bytes(32))

    def hex(self) -> str:
        return self.raw.hex()

    def __repr__(self):
        return f"MasterKey({self.hex()[:8]}...)"


def derive_subkeys(key: MasterKey, m: int) -> list[int]:
    """Round subkeys ``k1..km``: consecutive big-endian 32-bit words, reused cyclically."""
    if m < 1:
        raise ValueError("round count must be >= 1")
    words = [int.from_bytes(key.raw[4 * i : 4 * i + 4], "big") for i in range(8)]
    return [words[i % 8] for i in range(m)]


def logistic_seed(v: int) -> float:
    """Map a 32-bit word into the open interval (0, 1)."""
    return (v + 1) / (_TWO32 + 2)


def _stream_seed(subkey: int, domain_tag: int) -> float:
    return logistic_seed((subkey ^ (domain_tag << 27)) & 0xFFFFFFFF)


def keyed_byte_stream(subkey: int, domain_tag: int) -> Iterator[int]:
    """Unbounded byte stream; the first byte comes from the 101st iterate."""
    x = _stream_seed(subkey, domain_tag)
    for _ in range(WARMUP):
        x = 4.0 * x * (1.0 - x)
    while True:
        x = 4.0 * x * (1.0 - x)
        yield min(int(x * 256.0), 255)


@numba.njit(cache=True, nogil=True)
def _logistic_bytes(x, skip, count):
    for _ in range(skip):
        x = 4.0 * x * (1.0 - x)
    out = np.empty(count, dtype=np.uint8)
    for i in range(count):
        x = 4.0 * x * (1.0 - x)
        b = int(x * 256.0)
        out[i] = 255 if b > 255 else b
    return out


def stream_bytes(subkey: int, domain_tag: int, count: int) -> np.ndarray:
    """First ``count`` bytes of :func:`keyed_byte_stream`, computed in bulk."""
    return _logistic_bytes(_stream_seed(subkey, domain_tag), WARMUP, count)


@lru_cache(maxsize=256)
def _latin_square(subkey: int, order: int, tag: int) -> np.ndarray:
    stream = keyed_byte_stream(subkey, tag)
    perm = list(range(order))
    for i in range(order - 1, 0, -1):
        j = next(stream) % (i + 1)
        perm[i], perm[j] = perm[j], perm[i]
    shift = next(stream) % order
    idx = (np.arange(order)[:, None] + np.arange(order)[None, :] + shift) % order
    sq = np.asarray(perm, dtype=np.int64)[idx]
    sq.flags.writeable = False
    return sq


def gen_latin_square(subkey: int, order: int, tag: int = TAG_SCRAMBLE) -> np.ndarray:
    """Order-L Latin square ``O[i, j] = perm[(i + j + s) mod L]``."""
    if order < 1:
        raise ValueError("Latin square order must be >= 1")
    return _latin_square(subkey, order, tag)


@lru_cache(maxsize=64)
def _norm_matrix(subkey: int, m: int, n: int, tag: int) -> np.ndarray:
    q = stream_bytes(subkey, tag, m * n).reshape(m, n)
    q.flags.writeable = False
    return q


def gen_norm_matrix(subkey: int, m: int, n: int, tag: int = TAG_NORMALIZE) -> np.ndarray:
    if m < 1 or n < 1:
        raise ValueError("matrix dimensions must be >= 1")
    return _norm_matrix(subkey, m, n, tag)


def gen_mask(subkey: int, tag: int = TAG_MASK) -> np.ndarray:
    """3x3 filter mask; eight stream bytes row-major, anchor ``w[2, 2]`` fixed to 1."""
    w = np.empty(9, dtype=np.int64)
    w[:8] = stream_bytes(subkey, tag, 8)
    w[8] = 1
    return w.reshape(3, 3)


def is_latin_square(sq) -> bool:
    sq = np.asarray(sq)
    L = sq.shape[0]
    if sq.shape != (L, L):
        return False
    target = np.arange(L)
    return all(np.array_equal(np.sort(sq[i]), target) and np.array_equal(np.sort(sq[:, i]), target) for i in range(L))


def logistic_rotation_index(subkey: int, prev_sum: int, beta: int = 0) -> tuple[int, int, int, int]:
    """Rotation index from the plaintext/intermediate pixel sum.

    The seed word is ``subkey XOR (2**beta * prev_sum mod 2**32)``; the
    iterates x101..x104 are ranked (stable, ascending) and the 1-based rank
    of each sample is returned.
    """
    if prev_sum < 0:
        raise ValueError("pixel sum must be non-negative")
    if beta < 0:
        raise ValueError("beta must be non-negative")
    v = subkey ^ ((prev_sum << beta) % _TWO32)
    x = logistic_seed(v)
    for _ in range(WARMUP):
        x = 4.0 * x * (1.0 - x)
    samples = []
    for _ in range(4):
        x = 4.0 * x * (1.0 - x)
        samples.append(x)
    order = sorted(range(4), key=samples.__getitem__)
    ranks = [0] * 4
    for rank, pos in enumerate(order, start=1):
        ranks[pos] = rank
    return tuple(ranks)


# a schedule bundles the domain tags so tests can swap in other generators
@dataclass(frozen=True)
class KeySchedule:
    scramble_tag: int = TAG_SCRAMBLE
    normalize_tag: int = TAG_NORMALIZE
    mask_tag: int = TAG_MASK

    @classmethod
    def variant(cls, i: int) -> "KeySchedule":
        """The i-th alternative schedule (i = 0 is the default)."""
        return cls(3 * i, 3 * i + 1, 3 * i + 2)


DEFAULT_SCHEDULE = KeySchedule()
