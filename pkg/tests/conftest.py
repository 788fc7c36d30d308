import pytest

CRITERIA: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of one acceptance criterion; printed in the terminal summary."""

    def record(label: str, ok: bool, detail: str) -> bool:
        CRITERIA[label] = (ok, detail)
        print(f"criterion {label}: {'PASS' if ok else 'FAIL'}  {detail}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    key = lambda s: (int("".join(ch for ch in s if ch.isdigit()) or 0), s)
    for label in sorted(CRITERIA, key=key):
        ok, detail = CRITERIA[label]
        terminalreporter.write_line(f"criterion {label:>3}: {'PASS' if ok else 'FAIL'}  {detail}")
