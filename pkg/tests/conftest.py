"""Shared fixtures: the acceptance checklist recorder.

Checklist lines are buffered during the run and replayed in a terminal
summary section so they stay visible under output capture.
"""
import pytest

_CHECKLIST: list[str] = []


@pytest.fixture
def check():
    """Record one PASS/FAIL checklist line, then assert the verdict."""

    def _check(name: str, ok: bool, detail: str) -> None:
        line = f"[ACCEPTANCE] {'PASS' if ok else 'FAIL'} {name}: {detail}"
        _CHECKLIST.append(line)
        print(line)
        assert ok, line

    return _check


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _CHECKLIST:
        terminalreporter.section("acceptance checklist")
        for line in _CHECKLIST:
            terminalreporter.write_line(line)
