import numpy as np
import pytest

from eigsketch.bench import SpectrumSpec, generate_matrix

_ACCEPTANCE = []


@pytest.fixture
def record_criterion():
    """Record one acceptance line; printed in the terminal summary."""

    def record(name, passed, detail=""):
        _ACCEPTANCE.append((name, bool(passed), detail))
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}  {detail}")


@pytest.fixture(scope="session")
def power_law_64():
    spec = SpectrumSpec("power-law", 64)
    return generate_matrix(spec, 1), spec.spectrum()


@pytest.fixture(scope="session")
def power_law_256():
    spec = SpectrumSpec("power-law", 256)
    return generate_matrix(spec, 2), spec.spectrum()


def random_symmetric(d, seed):
    M = np.random.default_rng(seed).standard_normal((d, d))
    return (M + M.T) / 2
