from collections import defaultdict

import pytest

_criteria: dict = defaultdict(lambda: {"ok": True, "seconds": 0.0, "tests": 0})


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        report.criterion = marker.args[0]


def pytest_runtest_logreport(report):
    number = getattr(report, "criterion", None)
    if number is None:
        return
    entry = _criteria[number]
    if report.when == "call":
        entry["tests"] += 1
        entry["seconds"] += report.duration
    if report.failed:
        entry["ok"] = False


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        status = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(
            f"criterion {number}: {status}  ({entry['tests']} tests, {entry['seconds']:.2f} s)")
