import numpy as np
import pytest

_CRITERIA = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240517)


def pytest_runtest_logreport(report):
    if report.when == "call" and "acceptance" in report.keywords:
        _CRITERIA.append((report.outcome, report.nodeid.split("::")[-1]))


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for outcome, name in _CRITERIA:
            terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
