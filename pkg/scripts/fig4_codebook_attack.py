"""Build a 64x64 codebook against a decryption oracle and recover lena."""

import argparse
import time
from functools import partial
from pathlib import Path

import numpy as np

from bsifkit.codebook import CountingOracle, build_codebook, recover
from bsifkit.icbsif import decrypt, encrypt
from bsifkit.image_core import load_pgm, save_pgm
from bsifkit.improved import decrypt_improved, encrypt_improved
from bsifkit.keystream import MasterKey

from _common import DATA


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--key", default="5a" * 32)
    ap.add_argument("--improved", action="store_true", help="attack the hardened cipher instead")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", type=Path, default=Path("out/fig4"))
    args = ap.parse_args()

    key = MasterKey.from_hex(args.key)
    if args.improved:
        enc, dec = partial(encrypt_improved, key=key, m=3), partial(decrypt_improved, key=key, m=3)
    else:
        enc, dec = partial(encrypt, key=key), partial(decrypt, key=key)
    lena = load_pgm(DATA / "camera_64.pgm")
    C = enc(lena)

    oracle = CountingOracle(dec)
    t0 = time.perf_counter()
    cb = build_codebook(oracle, *lena.shape, jobs=args.jobs)
    P = recover(C, cb)
    print(f"queries={oracle.queries} time={time.perf_counter() - t0:.2f}s "
          f"wrong_pixels={int(np.count_nonzero(P != lena))}/{lena.size}")
    args.out.mkdir(parents=True, exist_ok=True)
    save_pgm(args.out / "plain.pgm", lena)
    save_pgm(args.out / "cipher.pgm", C)
    save_pgm(args.out / "recovered.pgm", P)


if __name__ == "__main__":
    main()
