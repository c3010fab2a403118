import pytest

from sublln.corpus import corpus_families

_ACCEPTANCE: list[tuple[int, str, bool]] = []


@pytest.fixture(scope="session")
def families():
    return corpus_families()


@pytest.fixture
def acceptance_log():
    """Record one pass/fail line per acceptance criterion for the summary."""

    def record(criterion: int, description: str, passed: bool):
        _ACCEPTANCE.append((criterion, description, passed))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion, description, ok in sorted(_ACCEPTANCE):
        status = "PASS" if ok else "FAIL"
        terminalreporter.write_line(f"criterion {criterion:>2}: {status} - {description}")
