import numpy as np
import pytest

_ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py::test_criterion_" not in report.nodeid:
        return
    name = report.nodeid.split("::test_criterion_", 1)[1]
    number, _, label = name.partition("_")
    detail = dict(report.user_properties).get("measured", "")
    _ACCEPTANCE[int(number)] = (report.outcome.upper(), label.replace("_", " "), detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_ACCEPTANCE):
        outcome, label, detail = _ACCEPTANCE[number]
        verdict = "PASS" if outcome == "PASSED" else "FAIL"
        line = f"criterion {number:2d}: {verdict}  {label}"
        if detail:
            line += f"  [{detail}]"
        terminalreporter.write_line(line)
