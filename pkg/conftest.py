"""Shared pytest hooks: print one PASS/FAIL line per acceptance criterion.

Acceptance tests are named test_<id>_... (p1..p10, s1); everything else is
an ordinary unit test and stays out of the summary.
"""

import re

_CRITERION = re.compile(r"test_(p\d+|s\d+)_")

_results: dict[str, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    match = _CRITERION.search(report.nodeid)
    if not match:
        return
    cid = match.group(1).upper()
    label = report.nodeid.split("::")[-1]
    outcome = report.outcome.upper()
    # a criterion split over several tests fails if any part fails
    if cid in _results and _results[cid][0] == "FAILED":
        return
    _results[cid] = (outcome, label)


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_results, key=lambda c: (c[0], int(c[1:]))):
        outcome, label = _results[cid]
        word = {"PASSED": "PASS", "FAILED": "FAIL", "SKIPPED": "SKIP"}.get(outcome, outcome)
        terminalreporter.write_line(f"{cid}: {word} - {label}")
