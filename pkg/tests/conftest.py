import os

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=40, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion id -> (passed, detail), filled by the acceptance tests
ACCEPTANCE = {}


@pytest.fixture
def criterion():
    """Record the outcome of an acceptance criterion for the summary table."""
    def record(cid, passed, detail=""):
        ACCEPTANCE[cid] = (bool(passed), detail)
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE, key=lambda c: int(c[1:])):
        ok, detail = ACCEPTANCE[cid]
        tr.write_line(f"{cid:<4} {'PASS' if ok else 'FAIL'}  {detail}")
