import random

import pytest

from chtnr.generators import diamond, p4, random_road_graph
from chtnr.tnr import build_tnr

P4_ORDER = (0, 1, 2, 3)


@pytest.fixture
def g4():
    return p4()


@pytest.fixture
def g0():
    return diamond()


@pytest.fixture(scope="session")
def p4_index():
    return build_tnr(p4(), k=2, forced_order=P4_ORDER, debug=True)


@pytest.fixture(scope="session")
def small_graphs():
    rng = random.Random(7)
    return [random_road_graph(rng.randint(20, 80), seed=s) for s in range(6)]


@pytest.fixture(scope="session")
def grid_indexes():
    """30x30 unit grid indexed with k = 16, 64, 256 on one shared hierarchy."""
    from chtnr.ch import build_hierarchy
    from chtnr.generators import grid

    g = grid(30, 30)
    ch = build_hierarchy(g)
    return g, {k: build_tnr(g, k=k, ch=ch) for k in (16, 64, 256)}


ACCEPTANCE_LINES: list[str] = []


def record_criterion(name: str, ok: bool, detail: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'}  {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
