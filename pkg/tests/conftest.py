import sys

import numpy as np
import pytest

from pride.data import SyntheticConfig, generate_confounded, train_test_split


@pytest.fixture(scope="session")
def small_synthetic():
    """A 300-row confounded design split 80/20."""
    data = generate_confounded(SyntheticConfig(n=300, seed=11))
    return train_test_split(data, 0.8, seed=5)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split()[2])):
        terminalreporter.write_line(line)
