from hypothesis import settings
import pytest

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")

_ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record one acceptance verdict; the lines are repeated at the end of the run."""
    def record(number: int, passed: bool, detail: str) -> str:
        line = f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return line
    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[number])
