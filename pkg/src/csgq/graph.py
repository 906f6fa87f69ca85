"""Weighted complete graphs, coalition structures and synthetic datasets.

Agents are identified by 1-based ids ``1..n`` in every public interface and
file format; the weight matrix is indexed 0-based internally.
"""

from __future__ import annotations

import math
import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import GraphValidationError, ParseError, PartitionError
from .rng import SplitMix64

Coalition = tuple  # strictly ascending tuple of 1-based agent ids

ABS_TOL = 1e-9


class WeightedGraph:
    """Complete undirected graph over agents ``1..n`` with real edge weights.

    Instances are immutable; the underlying symmetric matrix is read-only.
    """

    __slots__ = ("_w",)

    def __init__(self, matrix):
        w = np.array(matrix, dtype=np.float64)
        if w.ndim != 2 or w.shape[0] != w.shape[1] or w.shape[0] < 1:
            raise ValueError(f"weight matrix must be square and non-empty, got shape {w.shape}")
        if not np.array_equal(w, w.T):
            raise ValueError("weight matrix must be symmetric")
        if np.any(np.diag(w) != 0):
            raise ValueError("self-loops are not allowed (diagonal must be zero)")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        w.setflags(write=False)
        self._w = w

    @classmethod
    def from_pairs(cls, n: int, weights: dict) -> WeightedGraph:
        """Build from ``{(i, j): w_ij}`` with 1-based ids; every pair must be present once."""
        if n < 1:
            raise ValueError("n must be positive")
        w = np.zeros((n, n))
        seen = set()
        for (i, j), value in weights.items():
            if i == j or not (1 <= i <= n and 1 <= j <= n):
                raise GraphValidationError(f"invalid pair ({i}, {j}) for n={n}")
            key = (min(i, j), max(i, j))
            if key in seen:
                raise GraphValidationError(f"duplicate pair {key}")
            seen.add(key)
            w[i - 1, j - 1] = w[j - 1, i - 1] = value
        expected = n * (n - 1) // 2
        if len(seen) != expected:
            raise GraphValidationError(f"graph is incomplete: {len(seen)} of {expected} pairs given")
        return cls(w)

    @property
    def n(self) -> int:
        return self._w.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        """Read-only symmetric ``n x n`` weight matrix (0-based, zero diagonal)."""
        return self._w

    def weight(self, i: int, j: int) -> float:
        if i == j:
            raise ValueError("no self-loop weights")
        return float(self._w[i - 1, j - 1])

    def pairs(self) -> Iterator[tuple[int, int, float]]:
        """Yield ``(i, j, w_ij)`` for all ``i < j`` in row-major order."""
        n = self.n
        for i in range(n):
            for j in range(i + 1, n):
                yield i + 1, j + 1, float(self._w[i, j])

    def total_weight(self) -> float:
        return float(np.triu(self._w, 1).sum())

    def abs_weight_sum(self) -> float:
        return float(np.abs(np.triu(self._w, 1)).sum())

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return np.array_equal(self._w, other._w)

    def __hash__(self):
        return hash(self._w.tobytes())

    def __repr__(self):
        return f"WeightedGraph(n={self.n})"


@dataclass(frozen=True)
class CoalitionStructure:
    """A set of disjoint coalitions, stored canonically.

    Each coalition is an ascending tuple of 1-based ids and the coalitions are
    ordered by their smallest member.  Whether the structure covers a given
    graph's agents is checked by :func:`check_partition`.
    """

    coalitions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        parts = []
        for c in self.coalitions:
            members = tuple(sorted(int(a) for a in c))
            if not members:
                raise PartitionError("coalitions must be non-empty")
            if len(set(members)) != len(members):
                raise PartitionError(f"duplicate agent inside coalition {members}")
            parts.append(members)
        parts.sort(key=lambda m: m[0])
        object.__setattr__(self, "coalitions", tuple(parts))

    @classmethod
    def grand(cls, n: int) -> CoalitionStructure:
        return cls((tuple(range(1, n + 1)),))

    @classmethod
    def singletons(cls, n: int) -> CoalitionStructure:
        return cls(tuple((i,) for i in range(1, n + 1)))

    @classmethod
    def from_labels(cls, labels: Sequence[int], agents: Sequence[int] | None = None) -> CoalitionStructure:
        """Group ``agents`` (default ``1..len(labels)``) by equal label."""
        if agents is None:
            agents = range(1, len(labels) + 1)
        groups: dict = {}
        for agent, label in zip(agents, labels):
            groups.setdefault(label, []).append(agent)
        return cls(tuple(groups.values()))

    @property
    def agents(self) -> list[int]:
        return sorted(a for c in self.coalitions for a in c)

    def labels(self, n: int) -> np.ndarray:
        """0-based array mapping agent ``i+1`` to the index of its coalition."""
        check_partition(self, n)
        out = np.empty(n, dtype=np.int64)
        for idx, c in enumerate(self.coalitions):
            for a in c:
                out[a - 1] = idx
        return out

    def to_list(self) -> list[list[int]]:
        return [list(c) for c in self.coalitions]

    def __len__(self):
        return len(self.coalitions)

    def __iter__(self):
        return iter(self.coalitions)

    def __str__(self):
        return "{" + ", ".join("{" + ",".join(map(str, c)) + "}" for c in self.coalitions) + "}"


def check_partition(cs: CoalitionStructure, n: int) -> None:
    seen: set = set()
    for c in cs.coalitions:
        for a in c:
            if not 1 <= a <= n:
                raise PartitionError(f"agent {a} outside 1..{n}")
            if a in seen:
                raise PartitionError(f"agent {a} appears in more than one coalition")
            seen.add(a)
    if len(seen) != n:
        missing = sorted(set(range(1, n + 1)) - seen)
        raise PartitionError(f"agents missing from the structure: {missing}")


def _same_coalition_mask(graph: WeightedGraph, cs: CoalitionStructure) -> np.ndarray:
    labels = cs.labels(graph.n)
    return np.triu(labels[:, None] == labels[None, :], 1)


def value(graph: WeightedGraph, cs: CoalitionStructure) -> float:
    """Sum of the internal edge weights of every coalition."""
    return float(graph.matrix[_same_coalition_mask(graph, cs)].sum())


def cut_weight(graph: WeightedGraph, cs: CoalitionStructure) -> float:
    """Sum of the weights of edges running between different coalitions."""
    labels = cs.labels(graph.n)
    cross = np.triu(labels[:, None] != labels[None, :], 1)
    return float(graph.matrix[cross].sum())


def induced_subgraph(graph: WeightedGraph, coalition: Iterable[int]) -> tuple[WeightedGraph, dict]:
    """Subgraph on ``coalition`` relabelled to ``1..|C|``, plus the map new id -> original id."""
    members = sorted(coalition)
    if len(members) < 1:
        raise ValueError("coalition must contain at least one agent")
    if len(set(members)) != len(members) or members[0] < 1 or members[-1] > graph.n:
        raise PartitionError(f"invalid coalition {members} for n={graph.n}")
    idx = np.array(members) - 1
    sub = WeightedGraph(graph.matrix[np.ix_(idx, idx)])
    return sub, {new: old for new, old in enumerate(members, start=1)}


# --- synthetic datasets -----------------------------------------------------

@dataclass(frozen=True)
class DatasetConfig:
    """Parameters for :func:`generate_dataset`.

    ``distribution`` is ``("uniform", lo, hi)`` or ``("normal", mean, stddev)``.
    """

    n_values: tuple = tuple(range(4, 29, 2))
    graphs_per_n: int = 20
    distribution: tuple = ("uniform", -10.0, 10.0)
    integer_weights: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        if not self.n_values or any(n < 2 for n in self.n_values):
            raise ValueError("every n must be >= 2")
        if self.graphs_per_n < 1:
            raise ValueError("graphs_per_n must be >= 1")
        kind = self.distribution[0]
        if kind == "uniform":
            _, lo, hi = self.distribution
            if not lo < hi:
                raise ValueError(f"uniform distribution needs lo < hi, got {lo}, {hi}")
            if self.integer_weights and math.floor(hi) < math.ceil(lo):
                raise ValueError(f"no integer in [{lo}, {hi}]")
        elif kind == "normal":
            _, _, stddev = self.distribution
            if stddev < 0:
                raise ValueError("stddev must be non-negative")
        else:
            raise ValueError(f"unknown distribution {kind!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")


def parse_distribution(text: str) -> tuple:
    """Parse ``uniform:LO:HI`` or ``normal:MEAN:STDDEV``."""
    parts = text.split(":")
    if len(parts) != 3 or parts[0] not in ("uniform", "normal"):
        raise ValueError(f"distribution must look like uniform:LO:HI or normal:MEAN:STD, got {text!r}")
    return (parts[0], float(parts[1]), float(parts[2]))


def _draw(rng: SplitMix64, cfg: DatasetConfig) -> float:
    kind, a, b = cfg.distribution
    if kind == "uniform":
        if cfg.integer_weights:
            return float(rng.integer(math.ceil(a), math.floor(b)))
        return a + rng.uniform() * (b - a)
    x = rng.normal(a, b)
    return float(round(x)) if cfg.integer_weights else x


def generate_dataset(cfg: DatasetConfig) -> list[WeightedGraph]:
    """Draw ``graphs_per_n`` graphs for each n, in ``cfg.n_values`` order.

    A single SplitMix64 stream seeded with ``cfg.seed`` supplies every weight;
    within a graph pairs are visited row-major (``(1,2), (1,3), ..., (n-1,n)``).
    """
    rng = SplitMix64(cfg.seed)
    graphs = []
    for n in cfg.n_values:
        for _ in range(cfg.graphs_per_n):
            w = np.zeros((n, n))
            for i in range(n):
                for j in range(i + 1, n):
                    w[i, j] = w[j, i] = _draw(rng, cfg)
            graphs.append(WeightedGraph(w))
    return graphs


# --- file I/O ----------------------------------------------------------------

def format_weight(w: float) -> str:
    if float(w).is_integer() and abs(w) < 2**53:
        return str(int(w))
    return repr(float(w))


def dumps_graph(graph: WeightedGraph, comment: str | None = None) -> str:
    lines = []
    if comment:
        lines.extend(f"# {line}" for line in comment.splitlines())
    lines.append(f"n {graph.n}")
    lines.extend(f"{i} {j} {format_weight(w)}" for i, j, w in graph.pairs())
    return "\n".join(lines) + "\n"


def loads_graph(text: str, path=None) -> WeightedGraph:
    n = None
    weights: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        if n is None:
            if len(tokens) != 2 or tokens[0] != "n":
                raise ParseError("expected header 'n <count>'", lineno, path)
            try:
                n = int(tokens[1])
            except ValueError:
                raise ParseError(f"bad agent count {tokens[1]!r}", lineno, path) from None
            if n < 1:
                raise ParseError("agent count must be positive", lineno, path)
            continue
        if len(tokens) != 3:
            raise ParseError("expected '<i> <j> <weight>'", lineno, path)
        try:
            i, j = int(tokens[0]), int(tokens[1])
            w = float(tokens[2])
        except ValueError:
            raise ParseError(f"malformed edge line {line!r}", lineno, path) from None
        if not (1 <= i < j <= n):
            raise ParseError(f"edge ({i}, {j}) must satisfy 1 <= i < j <= {n}", lineno, path)
        if not math.isfinite(w):
            raise ParseError(f"non-finite weight {tokens[2]!r}", lineno, path)
        if (i, j) in weights:
            raise ParseError(f"duplicate edge ({i}, {j})", lineno, path)
        weights[(i, j)] = w
    if n is None:
        raise ParseError("missing header 'n <count>'", None, path)
    expected = n * (n - 1) // 2
    if len(weights) != expected:
        missing = [(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if (i, j) not in weights]
        raise GraphValidationError(
            f"{path or 'graph'}: incomplete edge set, {len(weights)} of {expected} pairs; first missing {missing[0]}"
        )
    return WeightedGraph.from_pairs(n, weights)


def write_graph(graph: WeightedGraph, path, comment: str | None = None) -> None:
    Path(path).write_text(dumps_graph(graph, comment))


def read_graph(path) -> WeightedGraph:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read graph file: {exc.strerror}", None, path) from exc
    return loads_graph(text, path)


_GRAPH_FILE = re.compile(r"graph_(\d+)\.txt$")
_N_DIR = re.compile(r"n(\d+)$")


def dataset_path(root, n: int, idx: int) -> Path:
    return Path(root) / f"n{n:02d}" / f"graph_{idx:02d}.txt"


def write_dataset(graphs: Sequence[WeightedGraph], root, cfg: DatasetConfig | None = None) -> list[Path]:
    """Write graphs under ``root/n<NN>/graph_<idx>.txt``; idx counts from 0 per n."""
    counters: dict = {}
    paths = []
    for g in graphs:
        idx = counters.get(g.n, 0)
        counters[g.n] = idx + 1
        path = dataset_path(root, g.n, idx)
        path.parent.mkdir(parents=True, exist_ok=True)
        comment = None
        if cfg is not None:
            kind, a, b = cfg.distribution
            comment = f"seed={cfg.seed} dist={kind}:{a:g}:{b:g} int={int(cfg.integer_weights)} n={g.n} idx={idx}"
        write_graph(g, path, comment)
        paths.append(path)
    return paths


def read_dataset(root) -> list[tuple[str, WeightedGraph]]:
    """Load every graph under ``root``, returning ``(instance_id, graph)`` sorted by n then idx."""
    root = Path(root)
    found = []
    for sub in os.listdir(root):
        m = _N_DIR.match(sub)
        if not m or not (root / sub).is_dir():
            continue
        for name in os.listdir(root / sub):
            fm = _GRAPH_FILE.match(name)
            if fm:
                found.append((int(m.group(1)), int(fm.group(1)), root / sub / name))
    found.sort()
    return [(f"{p.parent.name}/{p.stem}", read_graph(p)) for _, _, p in found]
