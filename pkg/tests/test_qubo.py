import itertools

import numpy as np
import pytest

import formulas
from csgq.exact import optimal_partition
from csgq.graph import CoalitionStructure, WeightedGraph, cut_weight, value
from csgq.qubo import (
    Encoding,
    PenaltyParams,
    Qubo,
    build,
    build_bisection,
    build_kochenberger,
    build_onehot_cut,
    build_rqubo,
    build_zens,
    decode,
    default_slots,
    encode,
    energies,
    energy,
    logical_variables,
    penalty_bound,
    sample_violations,
)
from csgq.solvers import solve_exhaustive

from conftest import random_graph

CS = CoalitionStructure
ONEHOT_KINDS = ("kochenberger", "zens", "onehot_cut", "rqubo")


def all_bits(m):
    return np.array(list(itertools.product((0, 1), repeat=m)), dtype=np.int8)


def test_energy_examples(g2):
    q, _ = build_bisection(g2)
    assert energy(q, "10") == 3
    assert energy(q, "00") == 0
    assert energy(q, "11") == 0
    with pytest.raises(ValueError):
        energy(q, "101")


def test_penalty_bound_examples(g3, g2):
    assert penalty_bound(g3).P == 9
    assert penalty_bound(WeightedGraph(np.zeros((4, 4)))).P == 1
    assert penalty_bound(g2).P == 4


def test_bisection_examples(g2, g3):
    q, enc = build_bisection(g2)
    assert q.coeffs == {(0, 0): 3, (1, 1): 3, (0, 1): -6}
    assert q.offset == 0 and enc.num_vars == 2
    q3, _ = build_bisection(g3)
    assert energy(q3, "001") == -4
    assert energy(q3, "000") == 0
    with pytest.raises(ValueError):
        build_bisection(WeightedGraph([[0.0]]))


def test_kochenberger_examples(g2):
    q, enc = build_kochenberger(g2, 2, PenaltyParams(4))
    assert q.offset == 8
    assert q.coeffs == {(0, 0): -4, (1, 1): -4, (2, 2): -4, (3, 3): -4,
                        (0, 1): 8, (2, 3): 8, (0, 2): -3, (1, 3): -3}
    assert energy(q, "1010") == -3 == -value(g2, CS.grand(2))
    assert energy(q, "0000") == 8
    with pytest.raises(ValueError):
        build_kochenberger(g2, 0, PenaltyParams(4))


def test_zens_examples(g2):
    q, enc = build_zens(g2, 1)
    assert q.coeffs == {(0, 1): -3} and q.offset == 0
    assert energy(q, "11") == -3
    assert energy(q, "00") == 0
    n4 = random_graph(np.random.default_rng(0), 4)
    assert build_zens(n4)[1].num_vars == 8
    assert build_kochenberger(n4)[1].num_vars == 16


def test_onehot_cut_examples(g2, g3):
    q, _ = build_onehot_cut(g2, 2, PenaltyParams(4))
    assert energy(q, "1001") == 6
    assert energy(q, "1010") == 0
    with pytest.raises(ValueError):
        build_onehot_cut(g2, 1)
    # an agent with two slots set sits strictly above the best feasible energy
    q3, enc = build_onehot_cut(g3, 3, penalty_bound(g3))
    X = all_bits(9)
    e = energies(q3, X)
    bad = sample_violations(X, enc) > 0
    assert e[bad].min() > e[~bad].min()


def test_rqubo_examples(g2, g3):
    q, _ = build_rqubo(g2, 1)
    assert q.coeffs == {(0, 0): 3, (1, 1): 3, (0, 1): -6}
    q3, enc = build_rqubo(g3, 2)
    bits = np.zeros(6, dtype=np.int8)
    bits[enc.index(0, 0)] = bits[enc.index(1, 0)] = 1
    assert energy(q3, bits) == -4 == cut_weight(g3, CS(((1, 2), (3,))))
    assert energy(q3, np.zeros(6)) == 0


def test_decode_examples(g3):
    _, enc = build_bisection(g3)
    d = decode("001", enc)
    assert d.feasible and d.structure == CS(((1, 2), (3,)))
    d = decode("1110", Encoding("kochenberger", (1, 2), 2))
    assert not d.feasible and d.violations == 1 and d.structure is None
    d = decode("000000", Encoding("rqubo", (1, 2, 3), 2))
    assert d.feasible and d.structure == CS.grand(3)
    d = decode("000000", Encoding("zens", (1, 2, 3), 2))
    assert d.structure == CS.singletons(3)
    d = decode("0110", Encoding("kochenberger", (4, 9), 2))
    assert d.structure == CS(((4,), (9,)))
    with pytest.raises(ValueError):
        decode("01", enc)


def test_decode_drops_empty_slots_and_translates_ids():
    enc = Encoding("onehot_cut", (3, 5, 8), 3)
    d = decode("001001100", enc)
    assert d.structure == CS(((3, 5), (8,)))


def test_logical_variables():
    assert logical_variables("kochenberger", 28, 28) == 784
    assert logical_variables("zens", 28) == 392
    assert logical_variables("bisection", 10) == 10
    assert logical_variables("rqubo", 28) == 28 * 27
    assert logical_variables("onehot_cut", 5) == 25


def _formula(kind, g, x, P):
    w = g.matrix.tolist()
    if kind == "bisection":
        return formulas.bisection(w, list(x))
    fn = getattr(formulas, kind)
    C = len(x) // g.n
    rows = [list(x[p * C:(p + 1) * C]) for p in range(g.n)]
    return fn(w, rows, P)


@pytest.mark.parametrize("kind", ("bisection",) + ONEHOT_KINDS)
@pytest.mark.parametrize("n", [2, 3])
def test_builders_match_literal_formulas(kind, n):
    rng = np.random.default_rng(n)
    for _ in range(3):
        g = random_graph(rng, n)
        P = penalty_bound(g).P
        slot_choices = [0] if kind == "bisection" else range(2 if kind == "onehot_cut" else 1, 4)
        for slots in slot_choices:
            q, enc = build(kind, g, slots or None, PenaltyParams(P))
            for x in all_bits(enc.num_vars):
                assert energy(q, x) == pytest.approx(_formula(kind, g, x, P), abs=1e-9)


def _identity(kind, g, structure):
    if kind in ("kochenberger", "zens"):
        return -value(g, structure)
    if kind == "onehot_cut":
        return 2 * cut_weight(g, structure)
    return cut_weight(g, structure)


@pytest.mark.parametrize("kind,n", [(k, n) for k in ("bisection",) + ONEHOT_KINDS for n in (1, 2, 3)
                                      if n >= 2 or k not in ("bisection", "onehot_cut")])
def test_energy_identities_exhaustive(kind, n):
    g = random_graph(np.random.default_rng(10 + n), n)
    for slots in ([None] if kind == "bisection" else [None, 1, 2, 3]):
        if kind == "onehot_cut" and slots == 1:
            continue
        q, enc = build(kind, g, slots)
        X = all_bits(enc.num_vars)
        for x, e, bad in zip(X, energies(q, X), sample_violations(X, enc)):
            d = decode(x, enc)
            assert d.feasible == (bad == 0)
            if d.feasible:
                assert e == pytest.approx(_identity(kind, g, d.structure), abs=1e-9)


def random_feasible_bits(rng, enc):
    n, C = len(enc.agents), enc.slots
    bits = np.zeros(enc.num_vars, dtype=np.int8)
    for p in range(n):
        if enc.kind in ("zens", "rqubo"):
            c = rng.integers(-1, C)
            if c >= 0:
                bits[enc.index(p, c)] = 1
        else:
            bits[enc.index(p, rng.integers(C))] = 1
    return bits


@pytest.mark.parametrize("kind", ONEHOT_KINDS)
def test_energy_identities_random_n8(kind):
    rng = np.random.default_rng(8)
    g = random_graph(rng, 8)
    q, enc = build(kind, g)
    for _ in range(1000):
        x = random_feasible_bits(rng, enc)
        d = decode(x, enc)
        assert d.feasible
        assert energy(q, x) == pytest.approx(_identity(kind, g, d.structure), abs=1e-9)


def test_energy_identity_real_weights():
    rng = np.random.default_rng(5)
    w = np.triu(rng.normal(size=(7, 7)), 1)
    g = WeightedGraph(w + w.T)
    for kind in ONEHOT_KINDS:
        q, enc = build(kind, g)
        for _ in range(200):
            x = random_feasible_bits(rng, enc)
            assert abs(energy(q, x) - _identity(kind, g, decode(x, enc).structure)) <= 1e-9


@pytest.mark.parametrize("kind", ONEHOT_KINDS)
@pytest.mark.parametrize("n", [2, 3])
def test_penalty_dominance(kind, n):
    rng = np.random.default_rng(100 + n)
    for _ in range(5):
        g = random_graph(rng, n)
        for slots in range(2 if kind == "onehot_cut" else 1, 4):
            q, enc = build(kind, g, slots, penalty_bound(g))
            X = all_bits(enc.num_vars)
            e = energies(q, X)
            bad = sample_violations(X, enc) > 0
            if bad.any():
                assert e[bad].min() > e[~bad].min()


def test_penalty_dominance_against_infeasible_heavy_graph():
    # all-negative weights tempt the solver to drop every agent from every slot
    g = WeightedGraph(-(np.ones((3, 3)) - np.eye(3)) * 10)
    for kind in ("kochenberger", "onehot_cut"):
        q, enc = build(kind, g)
        X = all_bits(enc.num_vars)
        e = energies(q, X)
        bad = sample_violations(X, enc) > 0
        assert e[bad].min() > e[~bad].min()


ARGMIN_CASES = [(kind, n) for kind in ONEHOT_KINDS for n in range(2, 9)
                if logical_variables(kind, n) <= 20]


@pytest.mark.parametrize("kind,n", ARGMIN_CASES)
def test_argmin_decodes_to_optimum(kind, n):
    rng = np.random.default_rng(1000 + n)
    for _ in range(3):
        g = random_graph(rng, n)
        q, enc = build(kind, g)
        best = solve_exhaustive(q)
        d = decode(best.first[0], enc)
        assert d.feasible
        assert value(g, d.structure) == optimal_partition(g)[1]


def test_rqubo_single_slot_equals_bisection():
    rng = np.random.default_rng(3)
    for n in range(2, 12):
        g = random_graph(rng, n)
        P = penalty_bound(g)
        assert build_rqubo(g, 1, P)[0].coeffs == build_bisection(g)[0].coeffs
        assert build_rqubo(g, 1, P)[0] == build_bisection(g)[0]


def test_encode_round_trip():
    rng = np.random.default_rng(6)
    g = random_graph(rng, 6)
    cs = CS(((1, 4), (2,), (3, 5, 6)))
    for kind in ONEHOT_KINDS:
        _, enc = build(kind, g)
        assert decode(encode(cs, enc), enc).structure == cs
    with pytest.raises(ValueError):
        encode(cs, Encoding("kochenberger", tuple(range(1, 7)), 2))


def test_default_slots():
    assert [default_slots(k, 9) for k in ("bisection", "kochenberger", "zens", "onehot_cut", "rqubo")] == \
        [0, 9, 4, 9, 8]


def test_qubo_text_round_trip(g3):
    q, _ = build_kochenberger(g3)
    text = q.to_text()
    assert text.startswith("m 9\noffset 27.0\n")
    assert Qubo.from_text(text) == q


def test_qubo_rejects_lower_triangle():
    with pytest.raises(ValueError):
        Qubo([[0, 0], [1, 0]])
