import pytest

from abphase.model import RegularizationParams, SetupConfig

ACCEPTANCE_LINES = []


@pytest.fixture
def cfg():
    return SetupConfig()


@pytest.fixture
def reg():
    return RegularizationParams()


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion and assert it."""

    def record(label, passed, detail):
        line = f"[{'PASS' if passed else 'FAIL'}] criterion {label}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
