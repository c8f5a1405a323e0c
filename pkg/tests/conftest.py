import pytest
from hypothesis import HealthCheck, settings

from avgdeg import build_from_edges

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE_LINES: list[tuple[str, bool, str]] = []


@pytest.fixture
def report_line():
    """Record a pass/fail line; names start with the criterion tag, e.g. "C3 onehop n<=9"."""
    def _add(name: str, passed: bool, detail: str = ""):
        passed = bool(passed)
        _ACCEPTANCE_LINES.append((name, passed, detail))
        print(f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}")
        return passed
    return _add


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    groups: dict[str, list] = {}
    for name, passed, detail in _ACCEPTANCE_LINES:
        groups.setdefault(name.split()[0], []).append((name, passed, detail))
    for tag in sorted(groups):
        rows = groups[tag]
        ok = sum(p for _, p, _ in rows)
        verdict = "PASS" if ok == len(rows) else "FAIL"
        terminalreporter.write_line(f"criterion {tag[1:]}: {verdict} ({ok}/{len(rows)} checks)")
    terminalreporter.write_line("")
    for name, passed, detail in _ACCEPTANCE_LINES:
        terminalreporter.write_line(f"  [{'PASS' if passed else 'FAIL'}] {name}: {detail}")


@pytest.fixture
def k4():
    return build_from_edges([(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)])


@pytest.fixture
def star4():
    return build_from_edges([(10, 1), (10, 2), (10, 3), (10, 4)])
