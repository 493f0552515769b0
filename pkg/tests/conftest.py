"""Shared pytest hooks.

Tests carrying ``@pytest.mark.criterion(number, title)`` are grouped by
criterion; the terminal summary prints one PASS/FAIL line per criterion
followed by whatever values the tests recorded with ``record_property``.
"""
import pytest

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    entry = _CRITERIA.setdefault(number, {"title": title, "passed": 0, "failed": [], "values": []})
    if report.failed:
        entry["failed"].append(item.name)
    elif report.when == "call" and report.passed:
        entry["passed"] += 1
    elif report.skipped:
        entry["failed"].append(f"{item.name} (skipped)")
    if report.when == "call":
        entry["values"].extend(f"{k}={v}" for k, v in item.user_properties)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        entry = _CRITERIA[number]
        ok = entry["passed"] > 0 and not entry["failed"]
        line = f"ACCEPTANCE {number:>2} {'PASS' if ok else 'FAIL'}  {entry['title']}"
        if entry["values"]:
            line += "  [" + ", ".join(entry["values"]) + "]"
        if entry["failed"]:
            line += "  failed: " + ", ".join(entry["failed"])
        terminalreporter.write_line(line)
