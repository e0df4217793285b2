import pytest

_OUTCOMES = {}
_SETUP = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if report.when == "setup":
        # shared fixtures do the simulation work for some criteria; count it
        _SETUP[number] = report.duration
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = ""
        if report.failed and call.excinfo is not None:
            detail = str(call.excinfo.value).splitlines()[0][:160] if str(call.excinfo.value) else call.excinfo.typename
        secs = report.duration + (_SETUP.get(number, 0.0) if report.when == "call" else 0.0)
        _OUTCOMES[number] = (title, report.outcome, secs, detail)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_OUTCOMES):
        title, outcome, secs, detail = _OUTCOMES[number]
        status = "PASS" if outcome == "passed" else "FAIL"
        line = f"criterion {number}: {status}  {title}  ({secs:.2f}s)"
        if detail:
            line += f"  -- {detail}"
        terminalreporter.write_line(line)
