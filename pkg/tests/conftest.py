"""Shared test plumbing: collect acceptance-criterion verdicts for the summary."""

_criterion_results: list[tuple[int, str, str]] = []


def record_criterion(number: int, description: str, status: str = "PASS") -> None:
    _criterion_results.append((number, description, status))
    print(f"ACCEPTANCE {number} {status}: {description}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_results:
        return
    terminalreporter.section("acceptance criteria")
    for number, description, status in sorted(_criterion_results):
        terminalreporter.write_line(f"criterion {number}: {status} - {description}")
