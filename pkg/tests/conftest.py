import itertools

import numpy as np
import pytest

from csgq.graph import CoalitionStructure, WeightedGraph


@pytest.fixture
def g3():
    return WeightedGraph.from_pairs(3, {(1, 2): 2, (1, 3): 1, (2, 3): -5})


@pytest.fixture
def g2():
    return WeightedGraph.from_pairs(2, {(1, 2): 3})


def random_graph(rng: np.random.Generator, n: int, lo: int = -10, hi: int = 10) -> WeightedGraph:
    w = np.triu(rng.integers(lo, hi + 1, size=(n, n)), 1).astype(float)
    return WeightedGraph(w + w.T)


def brute_value(graph: WeightedGraph, cs: CoalitionStructure) -> float:
    """Independent double loop over coalition members."""
    total = 0.0
    for c in cs:
        for a, b in itertools.combinations(c, 2):
            total += graph.weight(a, b)
    return total


def brute_cut(graph: WeightedGraph, cs: CoalitionStructure) -> float:
    where = {a: idx for idx, c in enumerate(cs) for a in c}
    return sum(w for i, j, w in graph.pairs() if where[i] != where[j])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
