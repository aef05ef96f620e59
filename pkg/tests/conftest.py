"""Collects ``criterion`` marks and prints one PASS/FAIL line per acceptance criterion."""

from collections import defaultdict

import pytest

_TITLES: dict[int, str] = {}
_OUTCOMES: dict[int, list[str]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion a test belongs to")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    rep = outcome.get_result()
    number, title = mark.args
    _TITLES[number] = title
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        _OUTCOMES[number].append("skipped" if rep.skipped else "passed" if rep.passed else "failed")


def pytest_terminal_summary(terminalreporter):
    if not _TITLES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_TITLES):
        results = _OUTCOMES[number]
        if "failed" in results:
            status = "FAIL"
        elif results and all(r == "skipped" for r in results):
            status = "SKIP"
        else:
            status = "PASS"
        counts = ", ".join(f"{results.count(k)} {k}" for k in ("passed", "failed", "skipped") if results.count(k))
        terminalreporter.write_line(f"{status} criterion {number}: {_TITLES[number]} ({counts})")
