"""Grayscale image substrate: modular pixel algebra, rotation and PGM I/O.

Images are plain 2-D ``numpy.uint8`` arrays indexed ``img[row, col]``.
Documentation uses the 1-based ``(x, y)`` convention with ``x`` the row;
everything in code is 0-based.
"""

from __future__ import annotations

import re
from typing import Sequence

import numpy as np

F = 256  # gray levels; 8-bit pixels only


class ShapeError(ValueError):
    """Raised when images that must agree in shape do not."""


class PGMError(ValueError):
    """Raised for malformed or unsupported PGM input."""


def as_image(img) -> np.ndarray:
    """Validate and return ``img`` as a 2-D uint8 array (no copy if possible)."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ShapeError(f"image must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() >= F):
            raise ValueError("pixel values must lie in [0, 256)")
        arr = arr.astype(np.uint8)
    return arr


def zeros(m: int, n: int) -> np.ndarray:
    return np.zeros((m, n), dtype=np.uint8)


def _check_same_shape(*imgs: np.ndarray) -> None:
    shapes = {im.shape for im in imgs}
    if len(shapes) != 1:
        raise ShapeError(f"dimension mismatch: {sorted(shapes)}")


def mod_add(a, b) -> np.ndarray:
    """Pixel-wise ``(a + b) mod F``."""
    a, b = as_image(a), as_image(b)
    _check_same_shape(a, b)
    # uint8 arithmetic wraps modulo 256
    return a + b


def mod_sub(a, b) -> np.ndarray:
    """Pixel-wise ``(a - b) mod F``."""
    a, b = as_image(a), as_image(b)
    _check_same_shape(a, b)
    return a - b


def mod_lincomb(images: Sequence[np.ndarray] | np.ndarray, coeffs: Sequence[int]) -> np.ndarray:
    """Return ``sum(c_i * img_i) mod F`` with the canonical non-negative residue.

    ``images`` may be a list of equal-shaped images or an already stacked
    ``(k, M, N)`` array. Coefficients may be negative or large; the sum is
    formed in int64 and reduced once at the end.
    """
    if isinstance(images, np.ndarray) and images.ndim == 3:
        stack = images
    else:
        images = [as_image(im) for im in images]
        if not images:
            raise ValueError("mod_lincomb needs at least one image")
        _check_same_shape(*images)
        stack = np.stack(images)
    if stack.shape[0] == 0:
        raise ValueError("mod_lincomb needs at least one image")
    coeffs = [int(c) for c in coeffs]
    if len(coeffs) != stack.shape[0]:
        raise ValueError(f"{stack.shape[0]} images but {len(coeffs)} coefficients")
    # reduce coefficients first so the int64 accumulator cannot overflow
    k = np.array([c % F for c in coeffs], dtype=np.int64)
    acc = np.zeros(stack.shape[1:], dtype=np.int64)
    for lo in range(0, len(k), _CHUNK):
        acc += np.tensordot(k[lo : lo + _CHUNK], stack[lo : lo + _CHUNK].astype(np.int64), axes=(0, 0))
    return np.mod(acc, F).astype(np.uint8)


_CHUNK = 512


def rotate90(img, quarter_turns: int) -> np.ndarray:
    """Rotate by ``quarter_turns`` x 90 degrees; positive is clockwise."""
    img = as_image(img)
    return np.ascontiguousarray(np.rot90(img, k=-(quarter_turns % 4)))


def pixel_sum(img) -> int:
    """Exact integer sum of all pixels (no modular reduction)."""
    return int(as_image(img).sum(dtype=np.int64))


# --- PGM (binary P5, maxval 255) ---------------------------------------------

_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def read_pgm(data: bytes) -> np.ndarray:
    """Parse a binary P5 PGM with maxval 255."""
    data = bytes(data)
    pos = 0
    fields = []
    for name in ("magic", "width", "height", "maxval"):
        m = _TOKEN.match(data, pos)
        if m is None:
            raise PGMError(f"truncated header: missing {name}")
        fields.append(m.group(1))
        pos = m.end()
    magic, width, height, maxval = fields
    if magic != b"P5":
        raise PGMError(f"bad magic {magic!r}: only binary P5 is supported")
    try:
        w, h, mv = int(width), int(height), int(maxval)
    except ValueError as exc:
        raise PGMError(f"non-numeric header field: {exc}") from None
    if w <= 0:
        raise PGMError(f"invalid width {w}")
    if h <= 0:
        raise PGMError(f"invalid height {h}")
    if mv != 255:
        raise PGMError(f"unsupported maxval {mv}: only 255 is accepted")
    if pos >= len(data) or not data[pos : pos + 1].isspace():
        raise PGMError("missing whitespace byte after maxval")
    pos += 1
    payload = data[pos : pos + w * h]
    if len(payload) != w * h:
        raise PGMError(f"truncated payload: expected {w * h} bytes, got {len(payload)}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w).copy()


def write_pgm(img) -> bytes:
    img = as_image(img)
    h, w = img.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(img).tobytes()


def load_pgm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return read_pgm(fh.read())


def save_pgm(path, img) -> None:
    with open(path, "wb") as fh:
        fh.write(write_pgm(img))
