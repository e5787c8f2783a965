from pathlib import Path

import pytest

from permuniv.matrix import read_matrix

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def single_grid():
    return read_matrix(FIXTURES / "single_thread.txt")


@pytest.fixture
def double_grid():
    return read_matrix(FIXTURES / "two_threads.txt")
