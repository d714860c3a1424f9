import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

_acceptance = []
_notes = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def note(request):
    """Attach a measured value to the acceptance summary line."""
    def add(text):
        _notes.setdefault(request.node.name, []).append(text)
    return add


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _acceptance.append((report.nodeid.split("::")[-1], report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in _acceptance:
        label = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}.get(outcome, outcome)
        extra = "; ".join(_notes.get(name, []))
        terminalreporter.write_line(f"{label:4}  {name}" + (f"  [{extra}]" if extra else ""))
