import contextlib
import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_RESULTS = []


@contextlib.contextmanager
def _criterion(name, capsys):
    """Report one acceptance criterion as a single PASS/FAIL line."""
    notes = []
    try:
        yield notes
    except BaseException as exc:
        line = f"FAIL  {name}: {exc}".splitlines()[0]
        _RESULTS.append(line)
        with capsys.disabled():
            print("\n" + line)
        raise
    line = f"PASS  {name}" + (f": {'; '.join(notes)}" if notes else "")
    _RESULTS.append(line)
    with capsys.disabled():
        print("\n" + line)


import pytest  # noqa: E402


@pytest.fixture
def criterion(capsys):
    return lambda name: _criterion(name, capsys)


def pytest_terminal_summary(terminalreporter):
    if _RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in _RESULTS:
            terminalreporter.write_line(line)
