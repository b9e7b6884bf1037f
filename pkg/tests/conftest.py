import sys
from pathlib import Path

import pytest
from hypothesis import settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

_RESULTS = []


@pytest.fixture
def record():
    """Log one acceptance outcome; the terminal summary prints all of them."""

    def _record(name: str, ok: bool, detail: str = ""):
        _RESULTS.append((name, bool(ok), detail))
        line = f"{name}: {'PASS' if ok else 'FAIL'} {detail}"
        print(line)
        return ok

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{name}: {'PASS' if ok else 'FAIL'}  {detail}")
