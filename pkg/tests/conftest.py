import pytest

# filled by tests/test_acceptance.py: criterion number -> (passed, detail)
CRITERIA: dict = {}


@pytest.fixture
def criterion():
    def record(number: int, passed: bool, detail: str) -> None:
        ok = CRITERIA.get(number, (True, ""))[0] and passed
        prev = CRITERIA.get(number, (True, ""))[1]
        CRITERIA[number] = (ok, f"{prev}; {detail}" if prev else detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
