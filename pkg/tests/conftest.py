"""Shared pytest wiring: the acceptance-criteria summary block.

Acceptance tests register one verdict per criterion; after the run the
terminal summary prints a single PASS/FAIL line for each so the outcome
is readable without digging through tracebacks.
"""
from __future__ import annotations

acceptance_results: dict[int, tuple[bool, str]] = {}


def record_criterion(number: int, passed: bool, detail: str):
    acceptance_results[number] = (passed, detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(acceptance_results):
        passed, detail = acceptance_results[number]
        verdict = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {verdict} - {detail}")
