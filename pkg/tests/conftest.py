from pathlib import Path

import pytest

from pa_coord import _core

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(params=sorted(_core.BACKENDS))
def backend(request):
    return request.param


@pytest.fixture
def fixture_path():
    return lambda name: FIXTURES / f"{name}.json"


_VERDICTS = pytest.StashKey[list]()


@pytest.fixture
def verdict(request):
    """``verdict(criterion, ok, detail)`` logs one PASS/FAIL line and returns ``ok``."""
    lines = request.config.stash.setdefault(_VERDICTS, [])

    def record(criterion, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {criterion}: {detail}"
        lines.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_VERDICTS, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: s.split("criterion ", 1)[1]):
            terminalreporter.write_line(line)
