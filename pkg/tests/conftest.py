from importlib import resources
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from nckscma.codebook import load_codebook
from nckscma.ldpc import load_alist

settings.register_profile("default", deadline=None)
settings.load_profile("default")

DATA = Path(str(resources.files("nckscma") / "data"))


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def cb46():
    return load_codebook(DATA / "codebook_4x6.json")


@pytest.fixture(scope="session")
def cb510():
    return load_codebook(DATA / "codebook_5x10.json")


@pytest.fixture(scope="session")
def hamming():
    return load_alist(DATA / "hamming_7_4.alist")


@pytest.fixture(scope="session")
def tree74():
    return load_alist(DATA / "tree_7_4.alist")


@pytest.fixture(scope="session")
def code12():
    return load_alist(DATA / "peg_264_r12.alist")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
