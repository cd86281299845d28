import os

import numpy as np
import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record a pass/fail line for an acceptance criterion (``ok=None`` marks it not run)."""

    def record(label, ok, detail=""):
        _CRITERIA.append((label, ok, detail))
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, detail in _CRITERIA:
        status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
        terminalreporter.write_line(f"[{status}] {label}  {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def long_runs_enabled():
    return os.environ.get("KICKEDROTOR_LONG", "") not in ("", "0")
