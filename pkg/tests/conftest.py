import numpy as np
import pytest
from hypothesis import settings

from pucci1d.model import Nonlinearity, Potential, PucciParams, Sign
from pucci1d.scalar import ScalarLandscape

# derandomized so that two runs of the suite see the same examples
settings.register_profile("repro", derandomize=True, deadline=None, max_examples=60)
settings.load_profile("repro")


@pytest.fixture(scope="session")
def f2():
    return Nonlinearity.power(2)


@pytest.fixture(scope="session")
def f3():
    return Nonlinearity.power(3)


@pytest.fixture(scope="session")
def ls2(f2):
    return ScalarLandscape.build(f2, 1.0)


@pytest.fixture(scope="session")
def ls3(f3):
    return ScalarLandscape.build(f3, 1.0)


@pytest.fixture(scope="session")
def sigmoid():
    return Potential.monotone(1.0, 1.5, 1.0)


@pytest.fixture(scope="session")
def well():
    return Potential.well(1.0, 0.3, 3.0)


def params(lam=1.0, Lam=2.0, branch="plus"):
    return PucciParams(lam, Lam, Sign(branch))


def rng(seed=0):
    return np.random.default_rng(seed)


ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record ``(number, title, ok, detail)`` for the end-of-run acceptance table."""

    def record(number, title, ok, detail=""):
        ACCEPTANCE[number] = (title, bool(ok), detail)
        print(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        title, ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {number:>2}. {title}: {detail}")
