import re

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    key = (int(match.group(1)), match.group(2))
    if report.when == "call" or report.outcome != "passed":
        _ACCEPTANCE[key] = _ACCEPTANCE.get(key, True) and report.outcome == "passed"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for (number, name), ok in sorted(_ACCEPTANCE.items()):
        terminalreporter.write_line(f"criterion {number:2d} {name.replace('_', ' '):<32} {'PASS' if ok else 'FAIL'}")
