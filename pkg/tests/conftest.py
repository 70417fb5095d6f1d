"""Shared pytest plumbing.

The acceptance tests measure things worth seeing even when everything
passes (judge metrics, ablation deltas, filter gaps). They record one
line each through the ``acceptance_note`` fixture and the hook below
echoes them after the test report.
"""

import pytest

_notes: list[str] = []


@pytest.fixture(scope="session")
def acceptance_note():
    """Callable that records a one-line measurement for the summary."""
    return _notes.append


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _notes:
        terminalreporter.section("acceptance notes")
        for line in _notes:
            terminalreporter.write_line(line)
