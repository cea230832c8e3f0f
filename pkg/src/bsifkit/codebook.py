"""Chosen-ciphertext codebook attack.

The attacker decrypts the all-zero ciphertext and the M*N unit impulses.
Since any ciphertext is ``C = sum k_n C_n - (sum k_n - 1) C_0`` with
``k_n`` its own pixel values, the three-image linear relation gives the
plaintext as ``P = sum k_n P_n - (sum k_n - 1) P_0 (mod F)``.

Entry ``n`` (1-based) is the impulse at 1-based pixel ``(i, j)`` with
``n = (i - 1) * M + j``; entry 0 is the plaintext of the zero ciphertext.
"""

from __future__ import annotations

import json
import logging
import os
import shlex
import subprocess
import tempfile
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Protocol

import numpy as np

from .image_core import ShapeError, as_image, load_pgm, mod_lincomb, save_pgm, write_pgm, read_pgm

log = logging.getLogger(__name__)

MANIFEST = "manifest.json"
MANIFEST_FORMAT = "bsifkit-codebook"
MANIFEST_VERSION = 1


class DecryptionOracle(Protocol):
    def __call__(self, ciphertext: np.ndarray) -> np.ndarray: ...


class OracleError(RuntimeError):
    def __init__(self, message: str, completed: int):
        super().__init__(f"{message} (after {completed} completed queries)")
        self.completed = completed


class CountingOracle:
    """Wraps an oracle and counts queries (thread-safe)."""

    def __init__(self, oracle: DecryptionOracle):
        self._oracle = oracle
        self._lock = threading.Lock()
        self.queries = 0

    def __call__(self, ciphertext):
        out = self._oracle(ciphertext)
        with self._lock:
            self.queries += 1
        return out


class CommandOracle:
    """Black-box oracle that runs an external command per query.

    ``template`` is a shell-style command line containing ``{in}`` and
    ``{out}``; the ciphertext is written as PGM to ``{in}`` and the plaintext
    PGM is read back from ``{out}``.
    """

    def __init__(self, template: str, timeout: float | None = None):
        if "{in}" not in template or "{out}" not in template:
            raise ValueError("oracle command must contain {in} and {out} placeholders")
        self.template = template
        self.timeout = timeout

    def __call__(self, ciphertext):
        with tempfile.TemporaryDirectory(prefix="bsif-oracle-") as tmp:
            src, dst = Path(tmp, "c.pgm"), Path(tmp, "p.pgm")
            src.write_bytes(write_pgm(ciphertext))
            argv = [a.replace("{in}", str(src)).replace("{out}", str(dst)) for a in shlex.split(self.template)]
            proc = subprocess.run(argv, capture_output=True, timeout=self.timeout)
            if proc.returncode != 0:
                raise RuntimeError(f"oracle command exited with {proc.returncode}: {proc.stderr.decode(errors='replace').strip()}")
            return read_pgm(dst.read_bytes())


def impulse_position(n: int, M: int, N: int) -> tuple[int, int]:
    """1-based pixel ``(i, j)`` of impulse entry ``n``."""
    i, j = divmod(n - 1, M)
    i += 1
    j += 1
    if not (1 <= i <= M and 1 <= j <= N):
        raise IndexError(f"entry {n} outside a {M}x{N} codebook")
    return i, j


def impulse_index(i: int, j: int, M: int) -> int:
    return (i - 1) * M + j


def basis_ciphertext(n: int, M: int, N: int) -> np.ndarray:
    """Ciphertext for entry ``n``: zero image for ``n == 0``, else a unit impulse."""
    c = np.zeros((M, N), dtype=np.uint8)
    if n:
        i, j = impulse_position(n, M, N)
        c[i - 1, j - 1] = 1
    return c


@dataclass(frozen=True, eq=False)
class Codebook:
    """Plaintexts of the zero ciphertext and of every unit impulse. Holds no key."""

    M: int
    N: int
    zero_plaintext: np.ndarray  # P0
    impulse_plaintexts: np.ndarray  # (M*N, M, N); row n-1 holds P_n

    def __post_init__(self):
        if self.impulse_plaintexts.shape != (self.M * self.N, self.M, self.N):
            raise ShapeError("impulse plaintexts do not match codebook dimensions")
        if self.zero_plaintext.shape != (self.M, self.N):
            raise ShapeError("zero plaintext does not match codebook dimensions")

    def __len__(self):
        return self.M * self.N + 1

    def entry(self, n: int) -> np.ndarray:
        return self.zero_plaintext if n == 0 else self.impulse_plaintexts[n - 1]

    def save(self, directory) -> None:
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for n in range(len(self)):
            save_pgm(directory / entry_filename(n), self.entry(n))
        write_manifest(directory, self.M, self.N)

    @classmethod
    def load(cls, directory) -> "Codebook":
        entries = _load_entries(Path(directory))
        M, N, got = entries
        missing = [n for n in range(M * N + 1) if n not in got]
        if missing:
            raise FileNotFoundError(f"codebook incomplete: {len(missing)} entries missing")
        return cls._from_entries(M, N, got)

    @classmethod
    def _from_entries(cls, M, N, got) -> "Codebook":
        imp = np.empty((M * N, M, N), dtype=np.uint8)
        for n in range(1, M * N + 1):
            imp[n - 1] = got[n]
        return cls(M, N, got[0], imp)


def entry_filename(n: int) -> str:
    return f"entry_{n:07d}.pgm"


def write_manifest(directory: Path, M: int, N: int) -> None:
    manifest = {
        "format": MANIFEST_FORMAT,
        "version": MANIFEST_VERSION,
        "height": M,
        "width": N,
        "entries": M * N + 1,
        "index_order": "entry 0 = zero ciphertext; entry n = impulse at 1-based (i, j), n = (i-1)*M + j",
        "filename_pattern": "entry_{n:07d}.pgm",
    }
    (directory / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")


def _load_entries(directory: Path):
    manifest = json.loads((directory / MANIFEST).read_text())
    if manifest.get("format") != MANIFEST_FORMAT:
        raise ValueError(f"{directory} is not a codebook directory")
    if manifest.get("version") != MANIFEST_VERSION:
        raise ValueError(f"unsupported codebook manifest version {manifest.get('version')}")
    M, N = int(manifest["height"]), int(manifest["width"])
    got = {}
    for n in range(M * N + 1):
        f = directory / entry_filename(n)
        if f.exists():
            img = load_pgm(f)
            if img.shape != (M, N):
                raise ShapeError(f"{f.name} has shape {img.shape}, expected {(M, N)}")
            got[n] = img
    return M, N, got


def build_codebook(oracle: DecryptionOracle, M: int, N: int, *, jobs: int = 1,
                   directory=None, progress: Callable[[int], None] | None = None) -> Codebook:
    """Query the oracle on the zero ciphertext and all M*N unit impulses.

    With ``directory`` each entry is written as it arrives and entries
    already on disk are not queried again. ``jobs`` > 1 issues queries from a
    thread pool.
    """
    if M != N:
        raise ShapeError(f"the cipher only handles square images, got {M}x{N}")
    got: dict[int, np.ndarray] = {}
    if directory is not None:
        directory = Path(directory)
        if (directory / MANIFEST).exists():
            m2, n2, got = _load_entries(directory)
            if (m2, n2) != (M, N):
                raise ShapeError(f"codebook at {directory} is {m2}x{n2}, expected {M}x{N}")
        else:
            directory.mkdir(parents=True, exist_ok=True)
            write_manifest(directory, M, N)
    todo = [n for n in range(M * N + 1) if n not in got]
    log.info("codebook %dx%d: %d cached, %d queries to issue", M, N, len(got), len(todo))

    completed = 0
    lock = threading.Lock()

    def query(n):
        nonlocal completed
        p = as_image(oracle(basis_ciphertext(n, M, N)))
        if p.shape != (M, N):
            raise ShapeError(f"oracle returned shape {p.shape} for a {M}x{N} ciphertext")
        if directory is not None:
            tmp = directory / (entry_filename(n) + ".part")
            save_pgm(tmp, p)
            os.replace(tmp, directory / entry_filename(n))
        with lock:
            got[n] = p
            completed += 1
            if progress is not None:
                progress(completed)

    try:
        if jobs <= 1:
            for n in todo:
                query(n)
        else:
            with ThreadPoolExecutor(max_workers=jobs) as pool:
                for fut in [pool.submit(query, n) for n in todo]:
                    fut.result()
    except Exception as exc:
        raise OracleError(f"oracle query failed: {exc}", completed) from exc
    return Codebook._from_entries(M, N, got)


def recover(C, cb: Codebook) -> np.ndarray:
    """Recover the plaintext of ``C`` from the codebook alone."""
    C = as_image(C)
    if C.shape != (cb.M, cb.N):
        raise ShapeError(f"ciphertext {C.shape} does not match codebook {(cb.M, cb.N)}")
    k = C.ravel().astype(np.int64)  # k_n in entry order, since n - 1 is the row-major offset
    used = np.flatnonzero(k)
    total = int(k.sum())
    stack = np.concatenate([cb.impulse_plaintexts[used], cb.zero_plaintext[None]])
    coeffs = list(k[used]) + [-(total - 1)]
    return mod_lincomb(stack, coeffs)
