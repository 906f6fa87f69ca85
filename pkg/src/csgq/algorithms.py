"""One-shot and iterative coalition structure generation on top of the QUBO encodings.

``run_one_shot`` solves a whole-graph formulation in a single call.
``run_iterative`` starts from the grand coalition and keeps splitting
coalitions into up to ``k`` parts while a split strictly raises the value;
with the bisection formulation this is GCS-Q.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import CapacityError
from .graph import CoalitionStructure, WeightedGraph, cut_weight, induced_subgraph, value
from .qubo import Encoding, Qubo, build, decode, default_slots, logical_variables, penalty_bound, sample_violations
from .solvers import SampleSet, SolveFn

FORMULATIONS = ("bisection", "kochenberger", "zens", "onehot_cut", "rqubo")

# command-line algorithm names -> formulation
ALGORITHMS = {
    "gcsq": "bisection",
    "kochenberger": "kochenberger",
    "zens": "zens",
    "nsplit": "onehot_cut",
    "rqubo": "rqubo",
}
_NAMES = {v: k for k, v in ALGORITHMS.items()}


@dataclass(frozen=True)
class AlgorithmSpec:
    formulation: str
    mode: str = "one_shot"
    k: int | None = None

    def __post_init__(self):
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"unknown formulation {self.formulation!r}")
        if self.mode not in ("one_shot", "iterative"):
            raise ValueError(f"mode must be 'one_shot' or 'iterative', got {self.mode!r}")
        if self.mode == "one_shot":
            if self.formulation == "bisection":
                raise ValueError("bisection only runs iteratively (GCS-Q)")
            if self.k is not None:
                raise ValueError("k applies to iterative mode only")
        else:
            k = 2 if self.k is None and self.formulation == "bisection" else self.k
            if k is None or k < 2:
                raise ValueError("iterative mode needs k >= 2")
            if self.formulation == "bisection" and k != 2:
                raise ValueError("bisection splits into exactly two parts (k=2)")
            object.__setattr__(self, "k", k)

    @classmethod
    def gcsq(cls) -> AlgorithmSpec:
        return cls("bisection", "iterative", 2)

    @property
    def name(self) -> str:
        """Record label: ``gcsq``, ``<algo>`` for one-shot, ``<algo>-iter`` for k-split."""
        base = _NAMES[self.formulation]
        if self.formulation == "bisection" or self.mode == "one_shot":
            return base
        return f"{base}-iter"

    def step_slots(self, size: int) -> int:
        """Slot count for one split of a coalition with ``size`` members."""
        f, k = self.formulation, self.k
        if f == "bisection":
            return 0
        if f == "zens":
            return max(1, min(k, size // 2))
        if f == "rqubo":
            return max(1, min(k - 1, size - 1))
        return min(k, size)

    def logical_vars(self, n: int) -> int:
        """Variables of the largest QUBO this algorithm builds on ``n`` agents."""
        if self.mode == "one_shot":
            return logical_variables(self.formulation, n)
        return logical_variables(self.formulation, n, self.step_slots(n) or None)


@dataclass
class StepRecord:
    coalition: tuple
    qubo: Qubo
    encoding: Encoding
    parts: CoalitionStructure | None
    cut: float | None
    accepted: bool


@dataclass
class RunResult:
    structure: CoalitionStructure
    value: float
    qubo_calls: int = 0
    max_vars: int = 0
    infeasible_samples: int = 0
    feasible: bool = True
    wall_time: float = 0.0
    steps: list = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        return {
            "structure": self.structure.to_list(),
            "value": self.value,
            "qubo_calls": self.qubo_calls,
            "max_vars": self.max_vars,
            "infeasible_samples": self.infeasible_samples,
            "feasible": self.feasible,
            "wall_time": self.wall_time,
        }


def best_feasible(samples: SampleSet, enc: Encoding):
    """Decode the lowest-energy feasible sample; returns ``(decoded or None, infeasible count)``."""
    bad = sample_violations(samples.samples, enc)
    infeasible = int((bad > 0).sum())
    for bits, violations in zip(samples.samples, bad):
        if violations == 0:
            return decode(bits, enc), infeasible
    return None, infeasible


def accept_split(graph_part: WeightedGraph, parts: CoalitionStructure) -> bool:
    """A split is taken only if it strictly raises the value, i.e. its cut weight is negative."""
    return cut_weight(graph_part, parts) < 0


def _solve(solve: SolveFn, q: Qubo, size: int) -> SampleSet:
    try:
        return solve(q)
    except CapacityError as exc:
        raise CapacityError(f"coalition of size {size}: {exc}") from exc


def run_one_shot(graph: WeightedGraph, spec: AlgorithmSpec, solve: SolveFn) -> RunResult:
    if spec.mode != "one_shot":
        raise ValueError("run_one_shot needs a one_shot spec")
    t0 = time.perf_counter()
    q, enc = build(spec.formulation, graph, default_slots(spec.formulation, graph.n), penalty_bound(graph))
    samples = _solve(solve, q, graph.n)
    decoded, infeasible = best_feasible(samples, enc)
    if decoded is None:
        structure, feasible = CoalitionStructure.singletons(graph.n), False
    else:
        structure, feasible = decoded.structure, True
    return RunResult(
        structure=structure,
        value=value(graph, structure),
        qubo_calls=1,
        max_vars=q.num_vars,
        infeasible_samples=infeasible,
        feasible=feasible,
        wall_time=time.perf_counter() - t0,
    )


def run_iterative(graph: WeightedGraph, spec: AlgorithmSpec, solve: SolveFn, trace: bool = False) -> RunResult:
    """Depth-first splitting from the grand coalition; ``trace`` keeps every step's QUBO."""
    if spec.mode != "iterative":
        raise ValueError("run_iterative needs an iterative spec")
    t0 = time.perf_counter()
    result = RunResult(CoalitionStructure.grand(graph.n), 0.0)
    work = [tuple(range(1, graph.n + 1))]
    final = []
    while work:
        coalition = work.pop()
        if len(coalition) < 2:
            final.append(coalition)
            continue
        sub, mapping = induced_subgraph(graph, coalition)
        slots = spec.step_slots(len(coalition))
        q, enc = build(spec.formulation, sub, slots or None, penalty_bound(sub))
        samples = _solve(solve, q, len(coalition))
        result.qubo_calls += 1
        result.max_vars = max(result.max_vars, q.num_vars)
        decoded, infeasible = best_feasible(samples, enc)
        result.infeasible_samples += infeasible

        parts, cut, accepted = None, None, False
        if decoded is not None:
            parts = decoded.structure
            cut = cut_weight(sub, parts)
            accepted = len(parts) > 1 and accept_split(sub, parts)
        if trace:
            result.steps.append(StepRecord(coalition, q, enc, parts, cut, accepted))
        if not accepted:
            final.append(coalition)
            continue
        mapped = [tuple(mapping[a] for a in part) for part in parts]
        for part in reversed(mapped):
            if len(part) >= 2:
                work.append(part)
            else:
                final.append(part)

    result.structure = CoalitionStructure(tuple(final))
    result.value = value(graph, result.structure)
    result.wall_time = time.perf_counter() - t0
    return result


def run(graph: WeightedGraph, spec: AlgorithmSpec, solve: SolveFn, trace: bool = False) -> RunResult:
    if spec.mode == "one_shot":
        return run_one_shot(graph, spec, solve)
    return run_iterative(graph, spec, solve, trace=trace)
