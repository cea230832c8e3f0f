from pathlib import Path

from bsifkit.image_core import load_pgm

DATA = Path(__file__).resolve().parent.parent / "tests" / "data"


def standard_images():
    """(lena stand-in, baboon stand-in) at 512x512."""
    return load_pgm(DATA / "camera_512.pgm"), load_pgm(DATA / "astronaut_512.pgm")
