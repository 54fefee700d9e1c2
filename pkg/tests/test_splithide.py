import itertools
import math
import random

import pytest

from bsmwb import splithide as sh
from bsmwb.errors import CapacityError, RejectedInput
from bsmwb.formats import (read_cnf, read_graph, read_multiset, read_reduction,
                           write_cnf, write_graph, write_multiset,
                           write_reduction)


def brute_sat(cnf):
    for assign in range(1 << cnf.variable_count):
        ok = True
        for clause in cnf.clauses:
            if not any(((assign >> (abs(l) - 1)) & 1) == (l > 0) for l in clause):
                ok = False
                break
        if ok:
            return 1
    return 0


def brute_3col(graph):
    vs = sorted(graph.vertex_labels, key=str)
    for colors in itertools.product(range(3), repeat=len(vs)):
        cmap = dict(zip(vs, colors))
        if all(cmap[tuple(e)[0]] != cmap[tuple(e)[1]] for e in graph.edges):
            return 1
    return 0


def brute_partition(ms):
    vals = ms.elements
    total = sum(vals)
    if total % 2:
        return 0
    return int(any(
        2 * sum(v for i, v in enumerate(vals) if (mask >> i) & 1) == total
        for mask in range(1 << len(vals))))


def random_3cnf(rng, n, clauses):
    out = []
    for _ in range(clauses):
        vs = rng.sample(range(1, n + 1), rng.randint(1, 3))
        out.append(frozenset(v if rng.random() < 0.5 else -v for v in vs))
    return sh.Cnf(n, tuple(out))


def random_graph(rng, n, p=0.5):
    edges = [(u, v) for u in range(1, n + 1) for v in range(u + 1, n + 1)
             if rng.random() < p]
    return sh.Graph.from_edge_list(n, edges)


# ---------------------------------------------------------------------------
# deciders against naive enumeration


def test_decide_sat_against_brute_force():
    rng = random.Random(0)
    for _ in range(60):
        cnf = random_3cnf(rng, rng.randint(1, 8), rng.randint(0, 12))
        assert sh.decide_sat(cnf) == brute_sat(cnf)


def test_decide_3col_against_brute_force():
    rng = random.Random(1)
    for _ in range(40):
        g = random_graph(rng, rng.randint(1, 6))
        assert sh.decide_3col(g) == brute_3col(g)


def test_decide_partition_against_brute_force():
    rng = random.Random(2)
    for _ in range(60):
        ms = sh.IntMultiset(tuple(rng.randrange(50) for _ in range(rng.randint(1, 12))))
        assert sh.decide_partition(ms) == brute_partition(ms)


def test_decider_trivial_examples():
    assert sh.decide_sat(sh.Cnf(1, (frozenset({1}), frozenset({-1})))) == 0
    k4 = sh.Graph.from_edge_list(4, [(a, b) for a in range(1, 5)
                                     for b in range(a + 1, 5)])
    assert sh.decide_3col(k4) == 0
    assert sh.decide_partition(sh.IntMultiset((3, 1, 1, 1))) == 1


# ---------------------------------------------------------------------------
# SAT split


def test_clause_enumeration_count():
    for n in (2, 3, 4):
        want = 2 * n + 4 * math.comb(n, 2) + 8 * math.comb(n, 3)
        clauses = sh.enumerate_clauses(n)
        assert len(clauses) == want
        assert len(set(clauses)) == want


def test_reduce_sat_examples():
    contradiction = sh.Cnf(2, (frozenset({1}), frozenset({-1})))
    out = sh.reduce_sat(contradiction, 11)
    assert sh.decide_sat(sh.conjoin(out.alice_part, out.bob_part)) == 0

    unit = sh.Cnf(2, (frozenset({1}),))
    out = sh.reduce_sat(unit, 11)
    assert sh.decide_sat(sh.conjoin(out.alice_part, out.bob_part)) == 1

    empty = sh.Cnf(2, ())
    out = sh.reduce_sat(empty, 11)
    assert sh.decide_sat(sh.conjoin(out.alice_part, out.bob_part)) == 1


def test_reduce_sat_equivalence_sampled():
    rng = random.Random(3)
    for trial in range(60):
        phi = random_3cnf(rng, 4, rng.randint(0, 10))
        out = sh.reduce_sat(phi, seed=trial)
        assert sh.decide_sat(phi) == \
            sh.decide_sat(sh.conjoin(out.alice_part, out.bob_part))


def test_reduce_sat_size_invariant():
    rng = random.Random(4)
    n = 4
    big_n = len(sh.enumerate_clauses(n))
    for trial in range(10):
        phi = random_3cnf(rng, n, rng.randint(0, 8))
        out = sh.reduce_sat(phi, seed=trial)
        assert len(out.bob_part.clauses) == big_n
        assert len(out.alice_part.clauses) == big_n
        assert len(out.fingerprint) == big_n


def test_reduce_sat_rejects_wide_clause():
    wide = sh.Cnf(5, (frozenset({1, 2, 3, 4}),))
    with pytest.raises(RejectedInput):
        sh.reduce_sat(wide, 0)
    with pytest.raises(CapacityError):
        sh.reduce_sat(sh.Cnf(30, ()), 0)


def test_reduction_determinism():
    phi = sh.Cnf(3, (frozenset({1, -2}),))
    assert sh.reduce_sat(phi, 9) == sh.reduce_sat(phi, 9)
    assert sh.reduce_sat(phi, 9) != sh.reduce_sat(phi, 10)
    g = random_graph(random.Random(0), 4)
    assert sh.reduce_3col(g, 5) == sh.reduce_3col(g, 5)
    ms = sh.IntMultiset((1, 2, 3))
    assert sh.reduce_partition(ms, 5) == sh.reduce_partition(ms, 5)


# ---------------------------------------------------------------------------
# 3COL split


def test_reduce_3col_triangle_and_k4():
    k3 = sh.Graph.from_edge_list(3, [(1, 2), (1, 3), (2, 3)])
    out = sh.reduce_3col(k3, 0)
    assert sh.decide_3col(sh.union_graph(out.alice_part, out.bob_part)) == 1
    k4 = sh.Graph.from_edge_list(4, [(a, b) for a in range(1, 5)
                                     for b in range(a + 1, 5)])
    out = sh.reduce_3col(k4, 0)
    assert sh.decide_3col(sh.union_graph(out.alice_part, out.bob_part)) == 0


def test_reduce_3col_equivalence_sampled():
    rng = random.Random(5)
    for trial in range(30):
        g = random_graph(rng, 5)
        out = sh.reduce_3col(g, seed=trial)
        assert sh.decide_3col(g) == \
            sh.decide_3col(sh.union_graph(out.alice_part, out.bob_part))


def test_reduce_3col_matching_invariant():
    rng = random.Random(6)
    n = 5
    big_n = math.comb(n, 2)
    for trial in range(10):
        g = random_graph(rng, n)
        out = sh.reduce_3col(g, seed=trial)
        # B is a perfect matching on exactly N of the 2N gadget pairs
        assert len(out.bob_part.edges) == big_n
        touched = set()
        for e in out.bob_part.edges:
            u, v = sorted(e, key=str)
            assert u.startswith("c") and v.startswith("c'")
            assert u[1:] == v[2:]
            touched.add(u[1:])
        assert len(touched) == big_n


def test_reduce_3col_rejects_bad_vertices():
    with pytest.raises(RejectedInput):
        sh.reduce_3col(sh.Graph(frozenset({1, 3}), frozenset()), 0)


# ---------------------------------------------------------------------------
# PARTITION split


def test_reduce_partition_trivial_examples():
    yes = sh.IntMultiset((1, 1, 2))
    out = sh.reduce_partition(yes, 1)
    assert sh.decide_partition(sh.union_multiset(out.alice_part, out.bob_part)) == 1
    no = sh.IntMultiset((1, 1, 1))
    out = sh.reduce_partition(no, 1)
    assert sh.decide_partition(sh.union_multiset(out.alice_part, out.bob_part)) == 0


def test_reduce_partition_exhaustive_n3():
    for trial, vals in enumerate(itertools.product(range(8), repeat=3)):
        ms = sh.IntMultiset(vals)
        out = sh.reduce_partition(ms, seed=trial)
        combined = sh.union_multiset(out.alice_part, out.bob_part)
        assert sh.decide_partition(ms) == sh.decide_partition(combined), vals


def test_reduce_partition_size():
    # n + n + n numbers plus the balancing set {half, half, 2*half, ...}
    for n in (1, 2, 3, 4, 5):
        out = sh.reduce_partition(sh.IntMultiset((0,) * n), 0)
        extra = (math.ceil(math.log2(n)) if n > 1 else 0) + 2
        assert len(out.alice_part.elements) == n
        assert len(out.bob_part.elements) == 2 * n + extra


def test_reduce_partition_rejects_oversized():
    with pytest.raises(RejectedInput):
        sh.reduce_partition(sh.IntMultiset((8, 0, 0)), 0)  # 8 >= 2^3


# ---------------------------------------------------------------------------
# privacy


def test_privacy_sat_alice_part_oblivious():
    a = random_3cnf(random.Random(1), 3, 4)
    b = random_3cnf(random.Random(2), 3, 2)
    for seed in (0, 1, 2):
        assert sh.reduce_sat(a, seed).alice_part == sh.reduce_sat(b, seed).alice_part


def test_privacy_3col_alice_part_oblivious():
    a = random_graph(random.Random(3), 4)
    b = random_graph(random.Random(4), 4)
    for seed in (0, 1):
        assert sh.reduce_3col(a, seed).alice_part == sh.reduce_3col(b, seed).alice_part


def test_check_privacy_small_samples():
    a = random_3cnf(random.Random(1), 3, 4)
    b = random_3cnf(random.Random(2), 3, 2)
    verdict = sh.check_privacy("sat", a, b, samples=1500, seed=0)
    assert verdict.ok and verdict.exact_match

    ga = random_graph(random.Random(5), 4)
    gb = random_graph(random.Random(6), 4)
    verdict = sh.check_privacy("3col", ga, gb, samples=1500, seed=0)
    assert verdict.ok and verdict.exact_match

    ma = sh.IntMultiset((1, 2, 3))
    mb = sh.IntMultiset((7, 0, 4))
    verdict = sh.check_privacy("partition", ma, mb, samples=1500, seed=0)
    assert verdict.ok


def test_check_privacy_rejects_unequal_sizes():
    with pytest.raises(RejectedInput):
        sh.check_privacy("partition", sh.IntMultiset((1,)),
                         sh.IntMultiset((1, 2)), samples=10)


def test_fingerprint_sampler_matches_full_reduction():
    phi = random_3cnf(random.Random(7), 3, 3)
    fast = sh._fingerprints("sat", phi, [41, 42])
    assert fast == [sh.reduce_sat(phi, 41).fingerprint,
                    sh.reduce_sat(phi, 42).fingerprint]
    g = random_graph(random.Random(8), 4)
    assert sh._fingerprints("3col", g, [7]) == [sh.reduce_3col(g, 7).fingerprint]
    ms = sh.IntMultiset((0, 5, 2))
    assert sh._fingerprints("partition", ms, [9]) == \
        [sh.reduce_partition(ms, 9).fingerprint]


# ---------------------------------------------------------------------------
# serialization


def test_cnf_roundtrip():
    phi = sh.Cnf(4, (frozenset({1, -2, 4}), frozenset({3})))
    assert read_cnf(write_cnf(phi)) == phi


def test_graph_roundtrip_with_labels():
    g = sh.Graph(frozenset({1, 2, "c3"}), frozenset({frozenset({1, "c3"})}))
    assert read_graph(write_graph(g)) == g


def test_multiset_roundtrip():
    ms = sh.IntMultiset((5, 0, 123456789123456789))
    assert read_multiset(write_multiset(ms)) == ms


def test_reduction_document_roundtrip():
    phi = random_3cnf(random.Random(9), 3, 3)
    out = sh.reduce_sat(phi, 13)
    doc = write_reduction(out)
    back = read_reduction(doc)
    assert back.kind == "sat" and back.seed == 13
    assert back.alice_part == out.alice_part
    assert back.bob_part == out.bob_part
