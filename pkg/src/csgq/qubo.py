"""QUBO encodings of coalition structure generation.

Five formulations are provided.  ``bisection`` is the two-way min-cut used by
GCS-Q.  ``kochenberger`` and ``onehot_cut`` one-hot encode each agent's
coalition slot.  ``zens`` reads an all-zero agent as its own singleton, and
``rqubo`` reads it as membership in a shared, unnumbered "coalition 0".

Variables use an agent-major layout: agent position ``p`` and slot ``c`` map
to index ``p * slots + c``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import CoalitionStructure, WeightedGraph

KINDS = ("bisection", "kochenberger", "onehot_cut", "zens", "rqubo")


class Qubo:
    """Quadratic form ``offset + sum_{a<=b} coeff[a,b] x_a x_b`` over binary ``x``.

    Coefficients live in a read-only upper-triangular matrix; the diagonal
    carries the linear terms.
    """

    __slots__ = ("_u", "offset")

    def __init__(self, upper, offset: float = 0.0):
        u = np.array(upper, dtype=np.float64)
        if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] < 1:
            raise ValueError("QUBO needs a non-empty square coefficient matrix")
        if np.any(np.tril(u, -1) != 0):
            raise ValueError("coefficient matrix must be upper triangular")
        u.setflags(write=False)
        self._u = u
        self.offset = float(offset)

    @classmethod
    def from_coeffs(cls, num_vars: int, coeffs: dict, offset: float = 0.0) -> Qubo:
        u = np.zeros((num_vars, num_vars))
        for (a, b), v in coeffs.items():
            a, b = min(a, b), max(a, b)
            u[a, b] += v
        return cls(u, offset)

    @property
    def num_vars(self) -> int:
        return self._u.shape[0]

    @property
    def matrix(self) -> np.ndarray:
        return self._u

    @property
    def coeffs(self) -> dict:
        """Non-zero coefficients keyed by ``(a, b)`` with ``a <= b``."""
        rows, cols = np.nonzero(self._u)
        return {(int(a), int(b)): float(self._u[a, b]) for a, b in zip(rows, cols)}

    def energy(self, bits) -> float:
        return energy(self, bits)

    def __eq__(self, other):
        if not isinstance(other, Qubo):
            return NotImplemented
        return self.offset == other.offset and np.array_equal(self._u, other._u)

    def __repr__(self):
        return f"Qubo(num_vars={self.num_vars}, nonzero={np.count_nonzero(self._u)}, offset={self.offset})"

    def to_text(self) -> str:
        lines = [f"m {self.num_vars}", f"offset {self.offset!r}"]
        lines.extend(f"{a} {b} {v!r}" for (a, b), v in self.coeffs.items())
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Qubo:
        lines = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if len(lines) < 2 or lines[0][0] != "m" or lines[1][0] != "offset":
            raise ValueError("QUBO text must start with 'm <num_vars>' and 'offset <value>'")
        m = int(lines[0][1])
        coeffs = {(int(a), int(b)): float(v) for a, b, v in lines[2:]}
        return cls.from_coeffs(m, coeffs, float(lines[1][1]))


def _as_bits(bits, m: int) -> np.ndarray:
    if isinstance(bits, str):
        bits = [int(ch) for ch in bits]
    x = np.asarray(bits, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != m:
        raise ValueError(f"bitstring length {x.shape[-1] if x.ndim else 0} does not match {m} variables")
    return x


def energy(q: Qubo, bits) -> float:
    x = _as_bits(bits, q.num_vars)
    return float(q.offset + x @ q.matrix @ x)


def energies(q: Qubo, samples: np.ndarray) -> np.ndarray:
    """Energies of each row of a ``(num_samples, num_vars)`` 0/1 array."""
    x = np.asarray(samples, dtype=np.float64)
    return q.offset + np.einsum("sa,ab,sb->s", x, q.matrix, x)


@dataclass(frozen=True)
class PenaltyParams:
    P: float

    def __post_init__(self):
        if not self.P > 0:
            raise ValueError("penalty weight must be positive")


def penalty_bound(graph: WeightedGraph) -> PenaltyParams:
    """``P = 1 + sum |w_ij|``; any one broken constraint outweighs every objective term."""
    return PenaltyParams(1.0 + graph.abs_weight_sum())


@dataclass(frozen=True)
class Encoding:
    kind: str
    agents: tuple
    slots: int

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown encoding kind {self.kind!r}")
        object.__setattr__(self, "agents", tuple(self.agents))
        if self.kind == "bisection" and self.slots != 0:
            raise ValueError("bisection encodings have no slots")
        if self.kind != "bisection" and self.slots < 1:
            raise ValueError("slot count must be >= 1")

    @property
    def num_vars(self) -> int:
        n = len(self.agents)
        return n if self.kind == "bisection" else n * self.slots

    def index(self, position: int, slot: int = 0) -> int:
        if self.kind == "bisection":
            return position
        return position * self.slots + slot


@dataclass(frozen=True)
class DecodedSolution:
    structure: CoalitionStructure | None
    feasible: bool
    violations: int


def default_slots(kind: str, n: int) -> int:
    if kind == "bisection":
        return 0
    if kind in ("kochenberger", "onehot_cut"):
        return n
    if kind == "zens":
        return max(1, n // 2)
    if kind == "rqubo":
        return max(1, n - 1)
    raise ValueError(f"unknown encoding kind {kind!r}")


def logical_variables(kind: str, n: int, slots: int | None = None) -> int:
    """Number of binary variables the encoding needs for ``n`` agents."""
    if kind == "bisection":
        return n
    if slots is None:
        slots = default_slots(kind, n)
    return n * slots


def _agents(graph: WeightedGraph, agents) -> tuple:
    if agents is None:
        return tuple(range(1, graph.n + 1))
    agents = tuple(agents)
    if len(agents) != graph.n:
        raise ValueError("agent id list must have one entry per graph node")
    return agents


def _upper_weights(graph: WeightedGraph) -> np.ndarray:
    return np.triu(graph.matrix, 1)


def _cut_block(graph: WeightedGraph) -> np.ndarray:
    """Per-slot min-cut block: ``w_ij`` on both diagonals, ``-2 w_ij`` on the pair."""
    w = graph.matrix
    return np.diag(w.sum(axis=1)) - 2.0 * _upper_weights(graph)


def build_bisection(graph: WeightedGraph, agents=None) -> tuple[Qubo, Encoding]:
    if graph.n < 2:
        raise ValueError("bisection needs at least two agents")
    enc = Encoding("bisection", _agents(graph, agents), 0)
    return Qubo(_cut_block(graph)), enc


def _check_slots(slots: int, minimum: int) -> None:
    if slots is None or slots < minimum:
        raise ValueError(f"slot count must be >= {minimum}, got {slots}")


def _slot_pairs_penalty(u: np.ndarray, n: int, slots: int, amount: float) -> None:
    for p in range(n):
        base = p * slots
        block = u[base:base + slots, base:base + slots]
        block += amount * np.triu(np.ones((slots, slots)), 1)


def _exactly_one_penalty(u: np.ndarray, n: int, slots: int, P: float) -> float:
    # P (1 - sum_c x_c)^2 = P - P sum_c x_c + 2P sum_{c<c'} x_c x_c'
    idx = np.arange(n * slots)
    u[idx, idx] -= P
    _slot_pairs_penalty(u, n, slots, 2.0 * P)
    return n * P


def build_kochenberger(graph: WeightedGraph, slots: int | None = None, penalty: PenaltyParams | None = None,
                       agents=None) -> tuple[Qubo, Encoding]:
    n = graph.n
    slots = default_slots("kochenberger", n) if slots is None else slots
    _check_slots(slots, 1)
    P = (penalty or penalty_bound(graph)).P
    u = np.zeros((n * slots, n * slots))
    reward = -_upper_weights(graph)
    for c in range(slots):
        u[c::slots, c::slots] += reward
    offset = _exactly_one_penalty(u, n, slots, P)
    return Qubo(u, offset), Encoding("kochenberger", _agents(graph, agents), slots)


def build_zens(graph: WeightedGraph, slots: int | None = None, penalty: PenaltyParams | None = None,
               agents=None) -> tuple[Qubo, Encoding]:
    n = graph.n
    slots = default_slots("zens", n) if slots is None else slots
    _check_slots(slots, 1)
    P = (penalty or penalty_bound(graph)).P
    u = np.zeros((n * slots, n * slots))
    reward = -_upper_weights(graph)
    for c in range(slots):
        u[c::slots, c::slots] += reward
    _slot_pairs_penalty(u, n, slots, P)
    return Qubo(u), Encoding("zens", _agents(graph, agents), slots)


def build_onehot_cut(graph: WeightedGraph, slots: int | None = None, penalty: PenaltyParams | None = None,
                     agents=None) -> tuple[Qubo, Encoding]:
    n = graph.n
    slots = default_slots("onehot_cut", n) if slots is None else slots
    _check_slots(slots, 2)
    P = (penalty or penalty_bound(graph)).P
    u = np.zeros((n * slots, n * slots))
    block = _cut_block(graph)
    for c in range(slots):
        u[c::slots, c::slots] += block
    offset = _exactly_one_penalty(u, n, slots, P)
    return Qubo(u, offset), Encoding("onehot_cut", _agents(graph, agents), slots)


def build_rqubo(graph: WeightedGraph, slots: int | None = None, penalty: PenaltyParams | None = None,
                agents=None) -> tuple[Qubo, Encoding]:
    n = graph.n
    slots = default_slots("rqubo", n) if slots is None else slots
    _check_slots(slots, 1)
    P = (penalty or penalty_bound(graph)).P
    u = np.zeros((n * slots, n * slots))
    block = _cut_block(graph)
    cross = -_upper_weights(graph)
    for c in range(slots):
        u[c::slots, c::slots] += block
        for c2 in range(slots):
            if c2 != c:
                # row p*slots+c < column q*slots+c2 whenever p < q
                u[c::slots, c2::slots] += cross
    _slot_pairs_penalty(u, n, slots, P)
    return Qubo(u), Encoding("rqubo", _agents(graph, agents), slots)


BUILDERS = {
    "kochenberger": build_kochenberger,
    "zens": build_zens,
    "onehot_cut": build_onehot_cut,
    "rqubo": build_rqubo,
}


def build(kind: str, graph: WeightedGraph, slots: int | None = None, penalty: PenaltyParams | None = None,
          agents=None) -> tuple[Qubo, Encoding]:
    if kind == "bisection":
        return build_bisection(graph, agents=agents)
    try:
        builder = BUILDERS[kind]
    except KeyError:
        raise ValueError(f"unknown encoding kind {kind!r}") from None
    return builder(graph, slots, penalty, agents=agents)


def decode(bits, enc: Encoding) -> DecodedSolution:
    """Translate a bitstring into a coalition structure over ``enc.agents``."""
    x = _as_bits(bits, enc.num_vars).astype(np.int64)
    agents: Sequence[int] = enc.agents
    if enc.kind == "bisection":
        return DecodedSolution(CoalitionStructure.from_labels(x.tolist(), agents), True, 0)

    rows = x.reshape(len(agents), enc.slots)
    counts = rows.sum(axis=1)
    if enc.kind in ("kochenberger", "onehot_cut"):
        violations = int(np.count_nonzero(counts != 1))
    else:
        violations = int(np.count_nonzero(counts > 1))
    if violations:
        return DecodedSolution(None, False, violations)

    slot_of = rows.argmax(axis=1)
    labels = []
    for p, count in enumerate(counts):
        if count:
            labels.append(int(slot_of[p]) + 1)
        elif enc.kind == "zens":
            labels.append(-(p + 1))  # private label: own singleton
        else:
            labels.append(0)  # rqubo: shared coalition 0
    return DecodedSolution(CoalitionStructure.from_labels(labels, agents), True, 0)


def encode(structure: CoalitionStructure, enc: Encoding) -> np.ndarray:
    """A bitstring that decodes to ``structure`` (inverse of :func:`decode` up to slot order).

    Raises ``ValueError`` when the encoding has too few slots for the structure.
    """
    pos = {a: p for p, a in enumerate(enc.agents)}
    bits = np.zeros(enc.num_vars, dtype=np.int8)
    if enc.kind == "bisection":
        if len(structure) > 2:
            raise ValueError("bisection can only encode two coalitions")
        for a in structure.coalitions[-1] if len(structure) == 2 else ():
            bits[pos[a]] = 1
        return bits
    coalitions = list(structure.coalitions)
    if enc.kind == "zens":
        coalitions = [c for c in coalitions if len(c) > 1]
    elif enc.kind == "rqubo" and coalitions:
        coalitions = coalitions[1:]  # the first coalition becomes coalition 0
    if len(coalitions) > enc.slots:
        raise ValueError(f"{len(coalitions)} coalitions do not fit into {enc.slots} slots")
    for slot, c in enumerate(coalitions):
        for a in c:
            bits[enc.index(pos[a], slot)] = 1
    return bits


def sample_violations(samples: np.ndarray, enc: Encoding) -> np.ndarray:
    """Per-sample count of agents breaking the encoding's multiplicity rule."""
    x = np.asarray(samples).reshape(-1, enc.num_vars)
    if enc.kind == "bisection":
        return np.zeros(x.shape[0], dtype=np.int64)
    counts = x.reshape(x.shape[0], len(enc.agents), enc.slots).sum(axis=2)
    if enc.kind in ("kochenberger", "onehot_cut"):
        return np.count_nonzero(counts != 1, axis=1)
    return np.count_nonzero(counts > 1, axis=1)
