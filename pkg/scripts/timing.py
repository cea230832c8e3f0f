"""Wall-clock comparison of the original and improved ciphers (informational)."""

import argparse
import timeit

import numpy as np

from bsifkit.icbsif import encrypt
from bsifkit.improved import encrypt_improved
from bsifkit.keystream import MasterKey


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--size", type=int, default=512)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    P = rng.integers(0, 256, (args.size, args.size), dtype=np.uint8)
    K = MasterKey.random(rng)
    encrypt(P, K), encrypt_improved(P, K, 3)  # warm caches and JIT
    base = min(timeit.repeat(lambda: encrypt(P, K), number=1, repeat=args.repeat))
    print(f"original (4 rounds): {base * 1e3:.1f} ms")
    for m in (3, 4):
        t = min(timeit.repeat(lambda: encrypt_improved(P, K, m), number=1, repeat=args.repeat))
        print(f"improved (m={m}):     {t * 1e3:.1f} ms  ({(t / base - 1) * 100:+.0f}%)")


if __name__ == "__main__":
    main()
