"""Shared test plumbing: the acceptance criterion report."""

from typing import List, Tuple

# (criterion number, description, passed, detail) appended by
# tests/test_acceptance.py as each criterion is evaluated
CRITERION_RESULTS: List[Tuple[int, str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERION_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, desc, ok, detail in sorted(CRITERION_RESULTS):
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {num:>2} {verdict}  {desc}: {detail}")
