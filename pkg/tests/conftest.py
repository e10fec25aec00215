import pytest

_lines = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion.

    Lines are echoed immediately (visible under -s) and replayed in the
    terminal summary so the acceptance ledger survives output capture.
    """

    def record(num: int, ok: bool, text: str) -> bool:
        line = f"[criterion {num:02d}] {'PASS' if ok else 'FAIL'}: {text}"
        _lines.append(line)
        print(line)
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if _lines:
        terminalreporter.section("acceptance criteria")
        for line in _lines:
            terminalreporter.write_line(line)
