import pytest

# filled by tests/test_acceptance.py, one report line per criterion
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    terminalreporter.write_line("id,status,measured,tolerance,description")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
