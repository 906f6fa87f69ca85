"""Classical QUBO minimizers returning annealer-style sample sets.

All three solvers work on single-bit flips with cached local fields, so an
energy delta costs O(1) and applying a flip costs O(m).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np
from numba import njit

from .errors import CapacityError
from .qubo import Qubo, energies

EXHAUSTIVE_CAP = 24
_EPS = 1e-12


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters; ``None`` selects the size-aware default.

    Defaults: SA runs ``10 m`` sweeps from ``max |coeff|`` down to ``1e-3`` of
    that; tabu uses tenure ``min(20, m)`` and restarts after ``50 m``
    consecutive non-improving moves.
    """

    seed: int = 0
    num_reads: int = 100
    sweeps: int | None = None
    t_initial: float | None = None
    t_final: float | None = None
    tenure: int | None = None
    max_stall: int | None = None

    def __post_init__(self):
        if self.num_reads < 1:
            raise ValueError("num_reads must be >= 1")
        for name in ("t_initial", "t_final"):
            t = getattr(self, name)
            if t is not None and not t > 0:
                raise ValueError(f"{name} must be positive")
        if self.tenure is not None and self.tenure < 1:
            raise ValueError("tenure must be >= 1")
        if self.sweeps is not None and self.sweeps < 1:
            raise ValueError("sweeps must be >= 1")
        if self.max_stall is not None and self.max_stall < 1:
            raise ValueError("max_stall must be >= 1")


@dataclass
class SampleSet:
    """Samples sorted by ascending energy (ties keep read order)."""

    samples: np.ndarray
    energies: np.ndarray
    solver: str
    elapsed: float = 0.0
    info: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, q: Qubo, samples: np.ndarray, solver: str, elapsed: float = 0.0, **info) -> SampleSet:
        samples = np.asarray(samples, dtype=np.int8).reshape(-1, q.num_vars)
        e = energies(q, samples)
        order = np.argsort(e, kind="stable")
        return cls(samples[order], e[order], solver, elapsed, info)

    @property
    def first(self) -> tuple[np.ndarray, float]:
        return self.samples[0], float(self.energies[0])

    def __len__(self):
        return len(self.energies)

    def __iter__(self):
        for bits, e in zip(self.samples, self.energies):
            yield bits, float(e)


def _split(q: Qubo) -> tuple[np.ndarray, np.ndarray]:
    """Linear terms and the symmetric zero-diagonal coupling matrix."""
    u = q.matrix
    diag = np.ascontiguousarray(np.diag(u))
    off = np.triu(u, 1)
    return diag, np.ascontiguousarray(off + off.T)


def _read_seed(seed: int, read: int) -> int:
    return int(np.random.SeedSequence([seed & (2**64 - 1), read]).generate_state(1)[0])


# --- exhaustive ----------------------------------------------------------------

@njit(cache=True)
def _gray_enumerate(diag, coupling, keep):
    m = diag.shape[0]
    x = np.zeros(m, dtype=np.int8)
    h = np.zeros(m)
    top_e = np.full(keep, np.inf)
    top_s = np.zeros(keep, dtype=np.int64)
    worst = 0
    e = 0.0
    state = 0
    top_e[0] = 0.0
    top_s[0] = 0
    filled = 1
    if keep == 1:
        worst = 0
    for i in range(1, 1 << m):
        b = 0
        while not (i >> b) & 1:
            b += 1
        sign = 1 - 2 * x[b]
        e += sign * (diag[b] + h[b])
        x[b] = 1 - x[b]
        state ^= 1 << b
        for a in range(m):
            h[a] += sign * coupling[a, b]
        if filled < keep:
            top_e[filled] = e
            top_s[filled] = state
            filled += 1
            if filled == keep:
                worst = 0
                for t in range(keep):
                    if top_e[t] > top_e[worst]:
                        worst = t
        elif e < top_e[worst]:
            top_e[worst] = e
            top_s[worst] = state
            for t in range(keep):
                if top_e[t] > top_e[worst]:
                    worst = t
    return top_s[:filled]


def solve_exhaustive(q: Qubo, cfg: SolverConfig | None = None) -> SampleSet:
    """Enumerate all ``2**m`` states; returns the ``num_reads`` lowest, global minimum first."""
    m = q.num_vars
    if m > EXHAUSTIVE_CAP:
        raise CapacityError(f"exhaustive solver is capped at {EXHAUSTIVE_CAP} variables, QUBO has {m}")
    cfg = cfg or SolverConfig()
    keep = min(cfg.num_reads, 1 << m)
    t0 = time.perf_counter()
    diag, coupling = _split(q)
    states = _gray_enumerate(diag, coupling, keep)
    bits = ((states[:, None] >> np.arange(m)) & 1).astype(np.int8)
    # order ties by state index so the result does not depend on heap layout
    bits = bits[np.argsort(states, kind="stable")]
    return SampleSet.from_samples(q, bits, "exhaustive", time.perf_counter() - t0)


# --- simulated annealing -------------------------------------------------------

@njit(cache=True)
def _sa_read(diag, coupling, betas, seed):
    np.random.seed(seed)
    m = diag.shape[0]
    x = np.zeros(m, dtype=np.int8)
    for a in range(m):
        x[a] = 1 if np.random.random() < 0.5 else 0
    h = np.zeros(m)
    e = 0.0
    for a in range(m):
        if x[a]:
            e += diag[a]
            for b in range(m):
                h[b] += coupling[a, b]
    for a in range(m):
        if x[a]:
            e += 0.5 * h[a]
    best_e = e
    best_x = x.copy()
    for beta in betas:
        for a in range(m):
            sign = 1 - 2 * x[a]
            d = sign * (diag[a] + h[a])
            if d <= 0.0 or np.random.random() < np.exp(-beta * d):
                x[a] = 1 - x[a]
                e += d
                for b in range(m):
                    h[b] += sign * coupling[a, b]
                if e < best_e - _EPS:
                    best_e = e
                    best_x[:] = x
    return best_x


def solve_sa(q: Qubo, cfg: SolverConfig | None = None) -> SampleSet:
    """Independent single-flip Metropolis anneals with a geometric schedule, one per read."""
    cfg = cfg or SolverConfig()
    m = q.num_vars
    t0 = time.perf_counter()
    diag, coupling = _split(q)
    scale = float(np.abs(q.matrix).max()) or 1.0
    t_hot = cfg.t_initial or scale
    t_cold = cfg.t_final or 1e-3 * t_hot
    sweeps = cfg.sweeps or 10 * m
    betas = 1.0 / np.geomspace(t_hot, t_cold, sweeps)
    reads = [_sa_read(diag, coupling, betas, _read_seed(cfg.seed, r)) for r in range(cfg.num_reads)]
    return SampleSet.from_samples(q, np.array(reads), "sa", time.perf_counter() - t0, seed=cfg.seed)


# --- tabu search -----------------------------------------------------------------

@njit(cache=True)
def _tabu_read(diag, coupling, tenure, max_stall, seed):
    np.random.seed(seed)
    m = diag.shape[0]
    x = np.zeros(m, dtype=np.int8)
    for a in range(m):
        x[a] = 1 if np.random.random() < 0.5 else 0
    h = np.zeros(m)
    e = 0.0
    for a in range(m):
        if x[a]:
            e += diag[a]
            for b in range(m):
                h[b] += coupling[a, b]
    for a in range(m):
        if x[a]:
            e += 0.5 * h[a]
    best_e = e
    best_x = x.copy()
    free_at = np.zeros(m, dtype=np.int64)
    it = 0
    stall = 0
    while stall < max_stall:
        it += 1
        pick = -1
        pick_d = np.inf
        ties = 0
        for a in range(m):
            d = (1 - 2 * x[a]) * (diag[a] + h[a])
            # aspiration: a tabu flip is admissible if it beats the incumbent
            if free_at[a] > it and not e + d < best_e - _EPS:
                continue
            if d < pick_d - _EPS:
                pick, pick_d, ties = a, d, 1
            elif d <= pick_d + _EPS:
                ties += 1
                if np.random.random() * ties < 1.0:
                    pick = a
                    pick_d = d
        if pick < 0:
            pick = 0
            for a in range(1, m):
                if free_at[a] < free_at[pick]:
                    pick = a
            pick_d = (1 - 2 * x[pick]) * (diag[pick] + h[pick])
        sign = 1 - 2 * x[pick]
        x[pick] = 1 - x[pick]
        e += pick_d
        for b in range(m):
            h[b] += sign * coupling[pick, b]
        free_at[pick] = it + tenure + 1
        if e < best_e - _EPS:
            best_e = e
            best_x[:] = x
            stall = 0
        else:
            stall += 1
    return best_x


def solve_tabu(q: Qubo, cfg: SolverConfig | None = None) -> SampleSet:
    """Multi-start tabu search; each read is one restart from a random state."""
    cfg = cfg or SolverConfig()
    m = q.num_vars
    t0 = time.perf_counter()
    diag, coupling = _split(q)
    tenure = cfg.tenure or min(20, m)
    max_stall = cfg.max_stall or 50 * m
    reads = [_tabu_read(diag, coupling, tenure, max_stall, _read_seed(cfg.seed, r)) for r in range(cfg.num_reads)]
    return SampleSet.from_samples(q, np.array(reads), "tabu", time.perf_counter() - t0, seed=cfg.seed)


SOLVERS = {"exhaustive": solve_exhaustive, "sa": solve_sa, "tabu": solve_tabu}


class Solver:
    """Callable ``Qubo -> SampleSet`` with a fresh, reproducible seed per call.

    Call ``i`` runs with seed derived from ``(cfg.seed, i)``, so a sequence of
    solves is reproducible from the configuration alone.
    """

    def __init__(self, name: str, cfg: SolverConfig | None = None):
        if name not in SOLVERS:
            raise ValueError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}")
        self.name = name
        self.cfg = cfg or SolverConfig()
        self.calls = 0

    def __call__(self, q: Qubo) -> SampleSet:
        cfg = replace(self.cfg, seed=_read_seed(self.cfg.seed, 1_000_000 + self.calls))
        self.calls += 1
        return SOLVERS[self.name](q, cfg)


SolveFn = Callable[[Qubo], SampleSet]
