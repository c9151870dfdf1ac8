import pytest

# Collected (criterion, outcome) pairs from tests/test_acceptance.py, printed
# as one line per criterion at the end of the run.
ACCEPTANCE_RESULTS: dict[str, str] = {}


def record_criterion(name: str, passed: bool, note: str = "") -> None:
    ACCEPTANCE_RESULTS[name] = ("PASS" if passed else "FAIL") + (f" ({note})" if note else "")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call" or "test_acceptance" not in str(item.fspath):
        return
    name = item.name
    if name not in ACCEPTANCE_RESULTS:
        ACCEPTANCE_RESULTS[name] = "PASS" if report.passed else "FAIL"
    elif report.failed:
        ACCEPTANCE_RESULTS[name] = "FAIL"


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for name, outcome in ACCEPTANCE_RESULTS.items():
        terminalreporter.write_line(f"[{outcome}] {name}")
