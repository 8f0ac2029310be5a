import numpy as np
import pytest

from croc.densities import GaussianModel

_CRITERIA = []


def record_criterion(number, name, passed, detail=""):
    line = f"[criterion {number:>2}] {'PASS' if passed else 'FAIL'}  {name}  {detail}".rstrip()
    _CRITERIA.append((number, line))
    print(line)
    return passed


@pytest.fixture
def criterion():
    return record_criterion


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_CRITERIA):
        terminalreporter.write_line(line)


def random_gaussian_case(rng, n, K, shift=1.0):
    """Random panel with one mean shift per stream and its oracle model."""
    xi = rng.integers(1, n, size=K)
    mean0 = rng.normal(size=K)
    mean1 = mean0 + shift
    rows = np.arange(n)[:, None]
    X = np.where(rows < xi, mean0, mean1) + rng.normal(size=(n, K))
    return X, tuple(int(v) for v in xi), GaussianModel(mean0, 1.0, mean1, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
