"""Shared pytest plumbing for the acceptance suite.

Each acceptance test registers one summary line via record(); the hook below
prints the collected lines in a dedicated section after the run so the
per-criterion verdicts survive output capture.
"""

ACCEPTANCE_LINES = []


def record(line):
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
