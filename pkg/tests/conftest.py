from collections import defaultdict

_outcomes = defaultdict(list)
_names = {}


def pytest_runtest_logreport(report):
    n = _names.get(report.nodeid)
    if n is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _outcomes[n].append(report.outcome)


def pytest_collection_modifyitems(items):
    for item in items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _names[item.nodeid] = mark.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        ok = all(o == "passed" for o in _outcomes[n])
        terminalreporter.write_line(f"CRITERION {n}: {'PASS' if ok else 'FAIL'}")

