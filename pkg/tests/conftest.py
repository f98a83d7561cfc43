import math

import pytest
from hypothesis import settings

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

INF = math.inf
CRITERIA: list[str] = []


@pytest.fixture
def half():
    from depbound.measures import Dist

    return Dist.parse("1/2,1/2")


@pytest.fixture
def criterion():
    """Record one pass/fail line for the acceptance summary."""

    def record(num, ok, detail, tol, elapsed, limit=None):
        timing = f"{elapsed:.2f}s" + (f" (limit {limit:g}s)" if limit is not None else "")
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {num}: {detail}; tol {tol}; time {timing}"
        CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
