"""Cryptanalysis workbench for the block-scrambling / image-filtering cipher."""

from .image_core import F, mod_add, mod_lincomb, pixel_sum, read_pgm, rotate90, write_pgm
from .keystream import MasterKey
from .icbsif import decrypt, encrypt
from .improved import decrypt_improved, encrypt_improved
from .codebook import Codebook, build_codebook, recover
from .diffanalysis import randomness_stats, verify_linear_relation

__all__ = [
    "F", "mod_add", "mod_lincomb", "pixel_sum", "read_pgm", "rotate90", "write_pgm",
    "MasterKey", "encrypt", "decrypt", "encrypt_improved", "decrypt_improved",
    "Codebook", "build_codebook", "recover", "randomness_stats", "verify_linear_relation",
]
