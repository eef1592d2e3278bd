import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def lam_grid():
    return np.linspace(-7.3, 7.3, 41)


_CRITERIA = []


@pytest.fixture
def criterion(pytestconfig, capsys):
    """Record and print one PASS/FAIL line per acceptance criterion."""

    def report(label, ok, detail=""):
        line = f"CRITERION {label}: {'PASS' if ok else 'FAIL'}" + (f"  ({detail})" if detail else "")
        _CRITERIA.append(line)
        with capsys.disabled():
            print("\n" + line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
