import sys
from pathlib import Path

import pytest

from mrdcsis._accel import available_backends

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = []


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


@pytest.fixture
def record_criterion():
    """Log one acceptance line: ``record_criterion(number, passed, detail)``."""

    def record(number, passed, detail):
        _CRITERIA.append((number, bool(passed), detail))

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(_CRITERIA, key=lambda r: r[0]):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {detail}")
