import pytest

# (criterion number, verdict, detail) collected by the acceptance tests
VERDICTS = []


@pytest.fixture
def verdict():
    def record(number, ok, detail):
        VERDICTS.append((number, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(VERDICTS):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
