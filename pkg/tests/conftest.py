import numpy as np
import pytest

from atsgraph import from_edges


def random_graph(rng, n, p, connected=False):
    """Erdos-Renyi graph; with ``connected`` a random spanning tree is added first."""
    edges = []
    if connected:
        order = rng.permutation(n)
        for i in range(1, n):
            edges.append((order[i], order[rng.integers(i)]))
    iu, ju = np.triu_indices(n, 1)
    keep = rng.random(iu.size) < p
    edges += list(zip(iu[keep], ju[keep]))
    return from_edges(n, edges)


@pytest.fixture
def path3():
    return from_edges(3, [(0, 1), (1, 2)])


@pytest.fixture
def triangle():
    return from_edges(3, [(0, 1), (1, 2), (0, 2)])


# (criterion, passed, detail) rows filled in by test_acceptance
ACCEPTANCE = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num, ok, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
