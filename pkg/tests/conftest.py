"""Terminal summary: one pass/fail line per acceptance criterion."""

from __future__ import annotations

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, tuple[str, str]] = {}
    for status, label in (
        ("passed", "PASS"),
        ("failed", "FAIL"),
        ("error", "FAIL"),
        ("skipped", "SKIP"),
    ):
        for report in terminalreporter.stats.get(status, ""):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match is None:
                continue
            number = int(match.group(1))
            description = match.group(2).replace("_", " ")
            current = outcomes.get(number)
            if current is None or label == "FAIL":
                outcomes[number] = (label, description)
    if not outcomes:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(outcomes):
        label, description = outcomes[number]
        terminalreporter.write_line(f"criterion {number:>2}: {label}  ({description})")
