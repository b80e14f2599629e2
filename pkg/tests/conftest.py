from pathlib import Path

import pytest

DATA = Path(__file__).parent / "data"
RESOURCES = DATA / "resources"
MINI = DATA / "mini"

_acceptance_lines: list[str] = []


@pytest.fixture
def data_dir():
    return DATA


@pytest.fixture
def resources():
    return RESOURCES


@pytest.fixture
def criterion(request):
    """Record a PASS/FAIL line for an acceptance criterion test."""
    label = request.node.get_closest_marker("criterion").args[0]
    yield
    rep = getattr(request.node, "rep_call", None)
    status = "PASS" if rep is not None and rep.passed else "FAIL"
    _acceptance_lines.append(f"{status}  {label}")


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
