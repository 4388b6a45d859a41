import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number n")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    n = props["criterion"]
    prev = _CRITERIA.get(n, ("PASS", []))
    status = prev[0] if report.passed else "FAIL"
    _CRITERIA[n] = (status, prev[1] + ([props["detail"]] if "detail" in props else []))


def pytest_runtest_setup(item):
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        item.user_properties.append(("criterion", marker.args[0]))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        status, details = _CRITERIA[n]
        line = f"criterion {n:2d}: {status}"
        if details:
            line += "  (" + "; ".join(details) + ")"
        terminalreporter.write_line(line)
