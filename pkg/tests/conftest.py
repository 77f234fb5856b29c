import pytest

_ACCEPTANCE_LINES = {}


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line per acceptance criterion."""

    def record(number, checks, elapsed, limit, detail=""):
        ok = all(checks.values()) and elapsed < limit
        failed = [k for k, v in checks.items() if not v]
        if elapsed >= limit:
            failed.append(f"runtime {elapsed:.2f}s >= {limit}s")
        status = "PASS" if ok else "FAIL"
        line = f"criterion {number:>2}: {status}  ({elapsed:.2f}s of {limit}s) {detail}"
        if failed:
            line += "  failed: " + "; ".join(failed)
        _ACCEPTANCE_LINES[number] = line
        print(line)
        return ok, line

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(_ACCEPTANCE_LINES[n])
