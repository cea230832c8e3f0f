from pathlib import Path

import numpy as np
import pytest

from bsifkit.image_core import load_pgm
from bsifkit.keystream import MasterKey

DATA = Path(__file__).parent / "data"

# fixed before any acceptance run; never tuned against results
REFERENCE_KEY = MasterKey(bytes(range(32)))


def random_image(rng, m, n=None):
    return rng.integers(0, 256, size=(m, n or m), dtype=np.uint8)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(scope="session")
def lena512():
    # stand-in for the classic 512x512 test image
    return load_pgm(DATA / "camera_512.pgm")


@pytest.fixture(scope="session")
def baboon512():
    return load_pgm(DATA / "astronaut_512.pgm")


@pytest.fixture(scope="session")
def lena64():
    return load_pgm(DATA / "camera_64.pgm")


# --- acceptance reporting ------------------------------------------------------

_ACCEPTANCE = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(number, title): an exit criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None or rep.when != "call":
        return
    detail = "; ".join(str(v) for k, v in item.user_properties if k == "detail")
    _ACCEPTANCE.append((mark.args[0], mark.args[1], rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, passed, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] {num}. {title} :: {detail}")
