import numpy as np
import pytest

from wmcen import Dataset


def random_dataset(rng, n, p, q, noise=0.5):
    x = rng.standard_normal((n, p))
    b = rng.standard_normal((p, q))
    y = x @ b + noise * rng.standard_normal((n, q))
    return Dataset(x, y)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
