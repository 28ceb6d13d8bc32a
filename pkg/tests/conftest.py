"""Shared pytest hooks: collects acceptance-criterion verdicts from
test_acceptance.py and prints one PASS/FAIL line per criterion after the
run, outside stdout capture."""

ACCEPTANCE_RESULTS: dict[int, bool] = {}


def record(criterion: int, ok: bool, detail: str = "") -> None:
    """Register a criterion verdict, then assert it."""
    ACCEPTANCE_RESULTS[criterion] = bool(ok)
    assert ok, f"A{criterion} failed: {detail}"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_RESULTS):
        verdict = "PASS" if ACCEPTANCE_RESULTS[n] else "FAIL"
        terminalreporter.write_line(f"A{n}: {verdict}")
