"""Shared pytest configuration: acceptance verdict lines in the terminal summary."""

ACCEPTANCE_RESULTS: dict = {}


def record_criterion(number: int, passed: bool, detail: str, seconds: float) -> str:
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} ({seconds:.1f} s) {detail}"
    ACCEPTANCE_RESULTS[number] = line
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_RESULTS):
        terminalreporter.write_line(ACCEPTANCE_RESULTS[k])
