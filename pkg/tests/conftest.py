import pytest

_DETAILS: dict[str, str] = {}
_ORDER: list[tuple[str, str]] = []


@pytest.fixture
def note(request):
    """Attach a one-line measurement to the running acceptance test."""

    def _note(text: str) -> None:
        _DETAILS[request.node.nodeid] = text

    return _note


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        _ORDER.append((report.nodeid, report.outcome))


def pytest_terminal_summary(terminalreporter):
    if not _ORDER:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for nodeid, outcome in _ORDER:
        name = nodeid.split("::")[-1]
        mark = "PASS" if outcome == "passed" else "FAIL"
        detail = _DETAILS.get(nodeid, "")
        terminalreporter.write_line(f"[{mark}] {name}: {detail}")
