"""Differential identities and the three-image linear relation.

For the original cipher ``E``, any three plaintexts satisfy

    E((P1 + P2 - P0) mod F) == (E(P1) + E(P2) - E(P0)) mod F

because every stage is either a pixel permutation, a modular translation or
a linear recurrence. This module checks that relation (end to end and stage
by stage) and computes a few cheap randomness statistics for differential
images.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from typing import Callable, Iterable, Sequence

import numpy as np
from scipy import stats

from .icbsif import (
    RoundContext,
    block_scramble,
    filter_image,
    normalize,
)
from .image_core import F, as_image, mod_add, mod_lincomb, mod_sub, rotate90

REPORT_SCHEMA_VERSION = 1


def check_prop1(a0: int, a1: int, a2: int, q: int, F: int = F) -> bool:
    """``E((a1 + a2 - a0) mod F) == (E(a1) + E(a2) - E(a0)) mod F`` with ``E(a) = (a + q) mod F``."""
    return check_prop2([a1, a2], a0, q, F)


def check_prop2(a: Sequence[int], a0: int, q: int, F: int = F) -> bool:
    if len(a) < 1:
        raise ValueError("need at least one term")
    E = lambda v: (v + q) % F  # noqa: E731
    n = len(a)
    lhs = E((sum(a) - (n - 1) * a0) % F)
    rhs = (sum(E(v) for v in a) - (n - 1) * E(a0)) % F
    return lhs == rhs


def prop2_counterexamples(a: np.ndarray, a0: np.ndarray, q: np.ndarray, F: int = F) -> int:
    """Vectorized form of :func:`check_prop2`; ``a`` has shape (samples, n). Returns failures."""
    a = np.asarray(a, dtype=np.int64)
    a0 = np.asarray(a0, dtype=np.int64)
    q = np.asarray(q, dtype=np.int64)
    n = a.shape[1]
    lhs = (np.mod(a.sum(axis=1) - (n - 1) * a0, F) + q) % F
    rhs = np.mod(np.mod(a + q[:, None], F).sum(axis=1) - (n - 1) * ((a0 + q) % F), F)
    return int(np.count_nonzero(lhs != rhs))


def differential_image(P1, P2, P0) -> np.ndarray:
    """``(P1 + P2 - P0) mod F``."""
    return mod_lincomb([P1, P2, P0], [1, 1, -1])


@dataclass
class LinearityReport:
    holds: bool
    mismatched_pixel_count: int
    mismatch_fraction: float
    height: int
    width: int
    agreement_pvalue: float | None = None

    @property
    def agreement_rate(self) -> float:
        return 1.0 - self.mismatch_fraction

    def to_dict(self) -> dict:
        d = {"schema_version": REPORT_SCHEMA_VERSION, "kind": "linearity"}
        d.update(asdict(self))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in self.to_dict().items())


def compare_images(delta_c, delta_c_prime) -> LinearityReport:
    delta_c, delta_c_prime = as_image(delta_c), as_image(delta_c_prime)
    mism = int(np.count_nonzero(delta_c != delta_c_prime))
    total = delta_c.size
    agree = total - mism
    pval = float(stats.binomtest(agree, total, 1 / F).pvalue)
    return LinearityReport(
        holds=mism == 0,
        mismatched_pixel_count=mism,
        mismatch_fraction=mism / total,
        height=delta_c.shape[0],
        width=delta_c.shape[1],
        agreement_pvalue=pval,
    )


def linear_relation_images(P0, P1, P2, encrypt_fn: Callable[[np.ndarray], np.ndarray]):
    """Return ``(delta_p, delta_c, delta_c_prime)``.

    ``delta_c`` encrypts the differential plaintext; ``delta_c_prime``
    combines the three individual ciphertexts.
    """
    delta_p = differential_image(P1, P2, P0)
    delta_c = encrypt_fn(delta_p)
    c0, c1, c2 = (encrypt_fn(p) for p in (P0, P1, P2))
    return delta_p, delta_c, differential_image(c1, c2, c0)


def verify_linear_relation(P0, P1, P2, encrypt_fn) -> LinearityReport:
    _, dc, dcp = linear_relation_images(P0, P1, P2, encrypt_fn)
    return compare_images(dc, dcp)


@dataclass
class StageReport:
    scramble: bool
    rotate: bool
    normalize: bool
    filter: bool
    samples: int

    @property
    def all_hold(self) -> bool:
        return self.scramble and self.rotate and self.normalize and self.filter


def verify_stage_differentials(ctx: RoundContext, samples: Iterable[tuple]) -> StageReport:
    """Check each stage of a round on triples ``(X0, X1, X2)``.

    * scrambling and rotation commute with pixel-wise ``+`` and ``-``;
    * normalization preserves the three-image combination ``X1 + X2 - X0``;
    * filtering maps differences to differences.
    """
    ok = dict(scramble=True, rotate=True, normalize=True, filter=True)
    count = 0
    scr = lambda X: block_scramble(X, ctx.O, ctx.L)  # noqa: E731
    rot = lambda X: rotate90(X, 1)  # noqa: E731
    for X0, X1, X2 in samples:
        count += 1
        for name, op in (("scramble", scr), ("rotate", rot)):
            y1, y2 = op(X1), op(X2)
            ok[name] &= np.array_equal(op(mod_add(X1, X2)), mod_add(y1, y2))
            ok[name] &= np.array_equal(op(mod_sub(X1, X2)), mod_sub(y1, y2))
        norm = lambda X: normalize(X, ctx.Q)  # noqa: E731
        ok["normalize"] &= np.array_equal(
            norm(differential_image(X1, X2, X0)), differential_image(norm(X1), norm(X2), norm(X0))
        )
        filt = lambda X: filter_image(X, ctx.W)  # noqa: E731
        ok["filter"] &= np.array_equal(filt(mod_sub(X1, X2)), mod_sub(filt(X1), filt(X2)))
    return StageReport(samples=count, **{k: bool(v) for k, v in ok.items()})


@dataclass
class RandomnessStats:
    ones_fraction: float
    chi_square_256: float
    zero_pixel_fraction: float

    def to_dict(self) -> dict:
        d = {"schema_version": REPORT_SCHEMA_VERSION, "kind": "stats"}
        d.update(asdict(self))
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        return "\n".join(f"{k}={v}" for k, v in self.to_dict().items())


def randomness_stats(img) -> RandomnessStats:
    img = as_image(img)
    total = img.size
    ones = int(np.unpackbits(img.ravel()).sum())
    hist = np.bincount(img.ravel(), minlength=F).astype(np.float64)
    expected = total / F
    chi2 = float(((hist - expected) ** 2).sum() / expected)
    return RandomnessStats(
        ones_fraction=ones / (8 * total),
        chi_square_256=chi2,
        zero_pixel_fraction=float(np.count_nonzero(img == 0)) / total,
    )
