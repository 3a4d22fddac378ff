"""Shared pytest configuration.

Prints one line per acceptance criterion at the end of the run so the
acceptance status is readable without grepping the full test output.
"""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_WORD = {"passed": "PASS", "failed": "FAIL", "error": "FAIL", "skipped": "SKIP"}


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    status = {}
    for outcome, word in _WORD.items():
        for rep in terminalreporter.stats.get(outcome, ()):
            match = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not match or getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            num = int(match.group(1))
            # A failure in any phase beats a pass recorded for another phase.
            if status.get(num) != "FAIL":
                status[num] = word
    if status:
        terminalreporter.write_sep("-", "acceptance criteria")
        for num in sorted(status):
            terminalreporter.write_line(f"criterion {num}: {status[num]}")
