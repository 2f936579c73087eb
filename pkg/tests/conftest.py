from functools import lru_cache

import pytest

from tournament_mutex.explorer import ExploreConfig, explore
from tournament_mutex.topology import build_topology

ACCEPTANCE_LINES: list[str] = []


@lru_cache(maxsize=None)
def graph_for(n: int, variant: str):
    return explore(build_topology(n), variant, ExploreConfig(workers=1))


@pytest.fixture
def graph():
    return graph_for


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
