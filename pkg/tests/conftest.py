import pytest

_LINES = []


@pytest.fixture
def record():
    """Log one summary line per acceptance criterion, printed at the end of the run."""

    def add(criterion, passed, detail):
        _LINES.append(f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}")
        return passed

    return add


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
