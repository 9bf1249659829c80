"""Shared pytest plumbing.

The acceptance tests append one line per criterion to ACCEPTANCE_LINES;
the terminal-summary hook prints them after the run so the per-criterion
verdicts are visible even when output capture is on.
"""

from __future__ import annotations

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
