import numpy as np
import pytest

# criterion number -> (description, outcomes seen)
_acceptance: dict[int, tuple[str, list[str]]] = {}
_markers: dict[str, tuple[int, str]] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        m = item.get_closest_marker("acceptance")
        if m is not None:
            _markers[item.nodeid] = (m.args[0], m.args[1])


def pytest_runtest_logreport(report):
    marker = _markers.get(report.nodeid)
    if marker is None:
        return
    if report.when == "call" or report.outcome != "passed":
        number, description = marker
        _acceptance.setdefault(number, (description, []))[1].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        description, outcomes = _acceptance[number]
        if "failed" in outcomes:
            status = "FAIL"
        elif "passed" in outcomes:
            status = "PASS"
        else:
            status = "SKIP"
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {description}")


@pytest.fixture
def rng():
    return np.random.default_rng(20100926)
