import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import instances  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def barbell():
    return instances.barbell()


@pytest.fixture
def good_tree(barbell):
    return instances.good_tree(barbell)


@pytest.fixture
def bad_tree(barbell):
    return instances.bad_tree(barbell)


def pytest_terminal_summary(terminalreporter):
    if instances.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(instances.RESULTS, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
