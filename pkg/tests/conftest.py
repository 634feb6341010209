from functools import lru_cache

import pytest

from panto.verifier import valid_substitutions
from panto.words import parse_substitution


@lru_cache(maxsize=None)
def enumerated(max_lam: int = 6):
    return tuple(valid_substitutions(max_lam))


@pytest.fixture(scope="session")
def thue_morse():
    return parse_substitution("a:ab,b:ba")


@pytest.fixture(scope="session")
def lam4():
    return parse_substitution("a:abab,b:abba")


@pytest.fixture(scope="session")
def all_valid():
    return enumerated(6)


_criteria: list[tuple[str, str, str, float]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        label = marker.args[0]
        if hasattr(item, "callspec"):
            label += f" [{item.callspec.id}]"
        _criteria.append((label, marker.args[1], "PASS" if rep.passed else "FAIL", rep.duration))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for label, text, verdict, duration in _criteria:
        terminalreporter.write_line(f"{verdict}  criterion {label}: {text} ({duration:.2f}s)")
