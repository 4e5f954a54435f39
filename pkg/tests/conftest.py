import re

import pytest

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = getattr(report, "criterion_detail", "")
        _results[k] = (report.outcome == "passed", detail)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    rep.criterion_detail = getattr(item, "criterion_detail", "")


@pytest.fixture
def detail(request):
    """Attach a one-line measurement summary to the criterion's PASS/FAIL line."""

    def put(text):
        request.node.criterion_detail = text

    return put


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        ok, text = _results[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {text}")
