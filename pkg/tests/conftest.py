import os
import re

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA: dict[int, tuple[str, str]] = {}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    num, title = int(m.group(1)), m.group(2).replace("_", " ")
    if report.when == "call" or report.failed:
        if report.failed or num not in _CRITERIA:
            _CRITERIA[num] = (title, "FAIL" if report.failed else ("SKIP" if report.skipped else "PASS"))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        title, outcome = _CRITERIA[num]
        terminalreporter.write_line(f"criterion {num:2d} [{outcome}] {title}")
