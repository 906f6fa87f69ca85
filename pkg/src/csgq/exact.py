"""Exact optimal coalition structures by dynamic programming over subsets."""

from __future__ import annotations

from typing import Iterator

import numpy as np
from numba import njit

from .errors import CapacityError
from .graph import CoalitionStructure, WeightedGraph

DP_CAP = 22
ENUM_CAP = 10


@njit(cache=True)
def _intra_values(w):
    n = w.shape[0]
    val = np.zeros(1 << n)
    for mask in range(1, 1 << n):
        low = 0
        while not (mask >> low) & 1:
            low += 1
        rest = mask & (mask - 1)
        s = 0.0
        for j in range(low + 1, n):
            if (rest >> j) & 1:
                s += w[low, j]
        val[mask] = val[rest] + s
    return val


@njit(cache=True)
def _subset_dp(val, n):
    size = 1 << n
    best = np.zeros(size)
    choice = np.zeros(size, dtype=np.int64)
    for s in range(1, size):
        low = s & -s
        rest = s ^ low
        best_v = -np.inf
        best_t = low
        sub = 0
        # ascending submasks of rest: the anchored block always holds the lowest agent
        while True:
            t = low | sub
            v = val[t] + best[s ^ t]
            if v > best_v:
                best_v = v
                best_t = t
            if sub == rest:
                break
            sub = (sub - rest) & rest
        best[s] = best_v
        choice[s] = best_t
    return best, choice


def optimal_partition(graph: WeightedGraph) -> tuple[CoalitionStructure, float]:
    """Value-maximizing coalition structure; O(3^n) time, O(2^n) memory."""
    n = graph.n
    if n > DP_CAP:
        raise CapacityError(f"exact solver is capped at n={DP_CAP}, graph has n={n}")
    val = _intra_values(np.ascontiguousarray(graph.matrix))
    best, choice = _subset_dp(val, n)
    full = (1 << n) - 1
    parts = []
    s = full
    while s:
        t = int(choice[s])
        parts.append(tuple(i + 1 for i in range(n) if (t >> i) & 1))
        s ^= t
    return CoalitionStructure(tuple(parts)), float(best[full])


def optimal_value(graph: WeightedGraph) -> float:
    return optimal_partition(graph)[1]


def enumerate_partitions(n: int) -> Iterator[CoalitionStructure]:
    """Every set partition of ``1..n`` exactly once, via restricted growth strings."""
    if n > ENUM_CAP:
        raise CapacityError(f"partition enumeration is capped at n={ENUM_CAP}")
    if n < 1:
        raise ValueError("n must be positive")
    labels = [0] * n

    def rec(i, top):
        if i == n:
            yield CoalitionStructure.from_labels(labels)
            return
        for lab in range(top + 2):
            labels[i] = lab
            yield from rec(i + 1, max(top, lab))

    yield from rec(0, -1)
