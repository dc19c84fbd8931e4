import pytest

_CRITERIA: dict[int, tuple[str, str]] = {}
_DETAILS: dict[str, list[str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion checked by the test")


@pytest.fixture
def detail(request):
    """Append-only list of lines printed under the test's acceptance summary line."""
    return _DETAILS.setdefault(request.node.nodeid, [])


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    number, title = marker.args
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        status = "PASS" if rep.passed else ("SKIP" if rep.skipped else "FAIL")
        _CRITERIA[number] = (title, status, item.nodeid)


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_CRITERIA):
        title, status, nodeid = _CRITERIA[number]
        terminalreporter.write_line(f"[{status}] criterion {number}: {title}")
        for line in _DETAILS.get(nodeid, []):
            terminalreporter.write_line(f"         {line}")
