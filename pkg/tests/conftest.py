from __future__ import annotations

import pytest

_CRITERIA: dict[str, dict] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(key, text): test belongs to an acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and not report.passed):
        key, text = marker.args
        entry = _CRITERIA.setdefault(key, {"text": text, "passed": True, "tests": 0})
        entry["tests"] += 1
        if not report.passed:
            entry["passed"] = False


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA, key=lambda k: int(k.lstrip("AC"))):
        entry = _CRITERIA[key]
        verdict = "PASS" if entry["passed"] else "FAIL"
        terminalreporter.write_line(f"{key:<5} {verdict}  {entry['text']}")
