import sys

import numpy as np
import pytest

from sparsegof.tables import load_builtin

RIVERS_COUNTS = [0, 0, 3, 0, 3, 2, 2, 1, 0, 2, 1, 0, 2, 0, 3, 1, 1, 0]


@pytest.fixture
def rivers():
    return load_builtin("rivers")


@pytest.fixture
def sclerosis():
    return load_builtin("sclerosis")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    if acceptance is None or not acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for text in acceptance.summary_lines():
        terminalreporter.write_line(text)
