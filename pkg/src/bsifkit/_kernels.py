"""Compiled inner loops for the causal 3x3 filter and its inverse.

Mask ``w[i, j]`` weights the neighbour at offset ``(i - 2, j - 2)``; ``w[2, 2]``
is the anchor. Neighbours above row 0 or left of column 0 read the
*normalized* image with wrap-around.
"""

from functools import lru_cache
import graphlib

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def filter_kernel(n, w):
    M, N = n.shape
    c = np.empty((M, N), dtype=np.int64)
    for x in range(M):
        for y in range(N):
            acc = np.int64(n[x, y])
            for i in range(3):
                for j in range(3):
                    if (i == 2 and j == 2) or w[i, j] == 0:
                        continue
                    a = x + i - 2
                    b = y + j - 2
                    if a < 0 or b < 0:
                        acc += w[i, j] * n[(a + M) % M, (b + N) % N]
                    else:
                        acc += w[i, j] * c[a, b]
            c[x, y] = acc & 255
    return c.astype(np.uint8)


@numba.njit(cache=True, nogil=True)
def unfilter_kernel(c, w, border_order):
    M, N = c.shape
    n = np.empty((M, N), dtype=np.int64)
    # interior pixels never touch the padding
    for x in range(2, M):
        for y in range(2, N):
            acc = np.int64(c[x, y])
            for i in range(3):
                for j in range(3):
                    if i == 2 and j == 2:
                        continue
                    acc -= w[i, j] * c[x + i - 2, y + j - 2]
            n[x, y] = acc & 255
    # border pixels in dependency order
    for k in range(border_order.shape[0]):
        x = border_order[k] // N
        y = border_order[k] % N
        acc = np.int64(c[x, y])
        for i in range(3):
            for j in range(3):
                if (i == 2 and j == 2) or w[i, j] == 0:
                    continue
                a = x + i - 2
                b = y + j - 2
                if a < 0 or b < 0:
                    acc -= w[i, j] * n[(a + M) % M, (b + N) % N]
                else:
                    acc -= w[i, j] * c[a, b]
        n[x, y] = acc & 255
    return n.astype(np.uint8)


@lru_cache(maxsize=128)
def border_order(M: int, N: int, offsets: tuple) -> np.ndarray:
    """Order in which border pixels can be recovered by the inverse filter.

    A border pixel (row < 2 or column < 2) depends on the recovered values at
    the wrapped positions of its out-of-range neighbours. Raises
    ``graphlib.CycleError`` when those dependencies are circular, which only
    happens for very small images.
    """
    ts = graphlib.TopologicalSorter()
    border = set()
    for x in range(M):
        for y in range(N):
            if x >= 2 and y >= 2:
                continue
            border.add(x * N + y)
            deps = []
            for dx, dy in offsets:
                a, b = x + dx, y + dy
                if a < 0 or b < 0:
                    a, b = a % M, b % N
                    if a < 2 or b < 2:
                        deps.append(a * N + b)
            ts.add(x * N + y, *deps)
    order = [p for p in ts.static_order() if p in border]
    return np.asarray(order, dtype=np.int64)
