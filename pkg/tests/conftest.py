import os

# numba reads this once at import; allows thread-count tests on 1-CPU hosts
os.environ.setdefault("NUMBA_NUM_THREADS", "4")

import json  # noqa: E402
from pathlib import Path  # noqa: E402

import pytest  # noqa: E402

from reliefbench.data import load_dataset  # noqa: E402

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


@pytest.fixture
def epistasis8():
    return load_dataset(FIXTURES / "epistasis8.tsv")


@pytest.fixture
def main_effect8():
    return load_dataset(FIXTURES / "main_effect8.tsv")


@pytest.fixture(scope="session")
def goldens():
    return json.loads((FIXTURES / "goldens.json").read_text())



# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
