import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)")
_outcomes: dict[int, tuple[str, str]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    n = int(m.group(1))
    if report.when == "call" or report.outcome != "passed":
        status = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        name = report.nodeid.split("::")[-1].split("[")[0]
        prev = _outcomes.get(n, ("PASS", name))[0]
        _outcomes[n] = (status if prev == "PASS" else prev, name)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        status, name = _outcomes[n]
        terminalreporter.write_line(f"criterion {n:2d}: {status}  ({name})")
