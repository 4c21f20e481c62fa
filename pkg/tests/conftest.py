import numpy as np
import pytest

from dualavg import kernels
from dualavg.problems import make_synthetic_svm, random_quadratic


@pytest.fixture(scope="session")
def svm_small():
    return make_synthetic_svm(60, 5, seed=3)


@pytest.fixture(scope="session")
def quad5():
    return random_quadratic(5, seed=11, mu=0.7)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=kernels.available_backends())
def backend(request):
    return request.param


ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Append a one-line PASS/FAIL verdict that is echoed in the terminal summary."""
    def record(number, passed, detail):
        ACCEPTANCE_LINES.append((number, f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}"
                                         f"  {detail}"))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
