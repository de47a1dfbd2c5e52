import pytest

_CRITERIA_LINES = []


@pytest.fixture
def criterion():
    """Recorder for one acceptance-criterion result line, echoed in the
    terminal summary."""
    return _CRITERIA_LINES.append


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_CRITERIA_LINES):
            terminalreporter.write_line(line)
