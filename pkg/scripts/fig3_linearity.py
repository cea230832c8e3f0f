"""Encrypt lena, baboon, a blank image and their differential; compare.

Writes the six images of the experiment as PGM files to --out.
"""

import argparse
from functools import partial
from pathlib import Path

from _common import standard_images

from bsifkit.diffanalysis import compare_images, linear_relation_images
from bsifkit.icbsif import encrypt
from bsifkit.image_core import save_pgm, zeros
from bsifkit.improved import encrypt_improved
from bsifkit.keystream import MasterKey


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--key", default=bytes(range(32)).hex())
    ap.add_argument("--improved", action="store_true")
    ap.add_argument("--rounds", type=int, default=4)
    ap.add_argument("--out", type=Path, default=Path("out/fig3"))
    args = ap.parse_args()

    key = MasterKey.from_hex(args.key)
    enc = partial(encrypt_improved, key=key, m=args.rounds) if args.improved else partial(encrypt, key=key)
    lena, baboon = standard_images()
    blank = zeros(*lena.shape)
    dp, dc, dcp = linear_relation_images(blank, lena, baboon, enc)
    args.out.mkdir(parents=True, exist_ok=True)
    for name, img in [("c_lena", enc(lena)), ("c_baboon", enc(baboon)), ("c_zero", enc(blank)),
                      ("delta_p", dp), ("delta_c", dc), ("delta_c_prime", dcp)]:
        save_pgm(args.out / f"{name}.pgm", img)
    print(compare_images(dc, dcp).to_text())


if __name__ == "__main__":
    main()
