"""Shared pytest plumbing: the acceptance-gate result registry.

Criterion outcomes are registered as they run and re-printed in the
terminal summary, where pytest's output capture cannot swallow them.
"""

ACCEPTANCE_RESULTS = []


def record_acceptance(line):
    ACCEPTANCE_RESULTS.append(line)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
