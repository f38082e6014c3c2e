import pytest

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    key = str(mark.args[0])
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        prev = _criteria.get(key, (True, mark.args[1]))[0]
        _criteria[key] = (prev and rep.passed, mark.args[1])


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria, key=lambda k: (int(k.rstrip("ab")), k)):
        ok, text = _criteria[key]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {key}: {text}")
