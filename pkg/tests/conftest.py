from __future__ import annotations

import re

_RESULTS: dict[int, tuple[str, str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    props = dict(report.user_properties)
    outcome = "PASS" if report.outcome == "passed" else "FAIL"
    _RESULTS[int(m.group(1))] = (outcome, props.get("title", ""), props.get("detail", ""))


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_RESULTS):
        outcome, title, detail = _RESULTS[n]
        line = f"criterion {n:2d} {outcome}: {title}"
        if detail:
            line += f" | {detail}"
        terminalreporter.write_line(line)
