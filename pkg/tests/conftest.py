import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_acceptance = []


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    detail = dict(report.user_properties).get("detail", "")
    name = report.nodeid.split("::")[-1].removeprefix("test_")
    _acceptance.append(f"{'PASS' if report.passed else 'FAIL'}  {name}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance:
            terminalreporter.write_line(line)
