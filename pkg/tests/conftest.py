import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        ACCEPTANCE[name] = report.passed


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import CRITERIA, DETAILS

    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for test_name, label in CRITERIA.items():
        if test_name in ACCEPTANCE:
            status = "PASS" if ACCEPTANCE[test_name] else "FAIL"
            terminalreporter.write_line(f"[{status}] {label}: {DETAILS.get(test_name, '')}")
