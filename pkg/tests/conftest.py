from __future__ import annotations

import random

import pytest


@pytest.fixture
def rng() -> random.Random:
    return random.Random(1234)


# --- acceptance summary ------------------------------------------------------
# Tests in test_acceptance.py attach a "criterion" (and optional "measured")
# user property; one PASS/FAIL line per criterion is printed at the end.

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        status = "PASS" if report.outcome == "passed" else "FAIL"
        _ACCEPTANCE.append((status, props["criterion"], str(props.get("measured", ""))))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for status, name, measured in _ACCEPTANCE:
        line = f"[{status}] {name}"
        terminalreporter.write_line(line + (f"  ({measured})" if measured else ""))
