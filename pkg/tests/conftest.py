import numpy as np
import pytest

from fegkp.fock import FockSpace
from fegkp.gkp import square_code


@pytest.fixture(scope="session")
def code25():
    return square_code(0.25, FockSpace(150))


@pytest.fixture(scope="session")
def code20():
    return square_code(0.2, FockSpace(150))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def acceptance_report(request):
    """Collects one PASS/FAIL line per acceptance criterion for the terminal summary."""
    lines = request.config.stash.setdefault(_LINES, [])

    def report(number, title, passed, detail, seconds):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {number:>2}  {title}: {detail}  [{seconds:.2f} s]"
        lines.append((number, line))
        print(line)

    return report


_LINES = pytest.StashKey[list]()


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines):
        terminalreporter.write_line(line)
