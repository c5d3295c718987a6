from __future__ import annotations

import pytest

_LINES: list[str] = []


@pytest.fixture
def criterion_log():
    """Record one PASS/FAIL line per acceptance criterion; the lines are echoed in the summary."""
    def log(number: int, ok: bool, detail: str):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _LINES.append(line)
        print(line)
        return ok
    return log


def pytest_terminal_summary(terminalreporter):
    if _LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
