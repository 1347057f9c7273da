"""Shared pytest hooks.

Acceptance checks register one summary line each through the ``verdict``
fixture; the lines are repeated at the end of the terminal report so the
outcome of every criterion is visible even without ``-s``.
"""
import pytest

_VERDICTS = []


@pytest.fixture
def verdict(request):
    def record(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
        print(line)
        _VERDICTS.append((number, line))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_VERDICTS):
        terminalreporter.write_line(line)
