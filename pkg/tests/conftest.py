import random
from pathlib import Path

import pytest

from sriu.formats import load_database
from sriu.synth import random_database

DATA = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def sample():
    return load_database(DATA / "sample.txt", DATA / "sample.utils")


@pytest.fixture(scope="session")
def sample_paths():
    return DATA / "sample.txt", DATA / "sample.utils"


def fuzz_databases(n, seed=0, **kwargs):
    for k in range(n):
        yield k, random_database(random.Random(seed * 1_000_003 + k), **kwargs)


ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
