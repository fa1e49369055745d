"""Shared fixtures plus the acceptance summary hook.

The hook prints one PASS/FAIL line per acceptance criterion at the end of
the run so the gate can be read off directly.
"""

from __future__ import annotations

import re

import pytest

# free-form lines tests may append; printed under the acceptance section
REPORT_LINES: list[str] = []

CRITERIA_LABELS = {
    1: "exact certificates on the 100-game suite, wall time in budget",
    2: "certificate support within the vertex bound",
    3: "purified rounding keeps every conditional value nonnegative",
    4: "stationary products zero the dual objective and balance exactly",
    5: "small games match the fully materialized incentive matrix",
    6: "every logged ellipsoid update contracts volume fast enough",
    7: "iteration bound formula matches independent evaluation",
    8: "every transcript cut is a verbatim dual constraint row",
    9: "bit-identical reruns",
    10: "product mode reports exact epsilon, purified stays at zero",
}

_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[int, str] = {}
    for status in ("passed", "failed", "error", "skipped"):
        for report in terminalreporter.stats.get(status, []):
            nodeid = getattr(report, "nodeid", "")
            match = _PATTERN.search(nodeid)
            if not match:
                continue
            if getattr(report, "when", "call") not in ("call", "setup"):
                continue
            number = int(match.group(1))
            verdict = "PASS" if status == "passed" else "FAIL"
            if status == "skipped":
                verdict = "SKIP"
            # setup failures count as FAIL; don't overwrite a call result
            if number not in outcomes or verdict == "FAIL":
                outcomes[number] = verdict
    if not outcomes and not REPORT_LINES:
        return
    writer = terminalreporter
    writer.section("acceptance criteria")
    for number in sorted(outcomes):
        label = CRITERIA_LABELS.get(number, "")
        writer.write_line(f"criterion {number:02d} {outcomes[number]}  {label}")
    for line in REPORT_LINES:
        writer.write_line(line)


@pytest.fixture(scope="session")
def tmp_workdir(tmp_path_factory):
    return tmp_path_factory.mktemp("work")
