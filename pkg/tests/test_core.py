import random

import pytest

from bsmwb.core import (BsmProtocol, CarolCost, CircuitBuilder, LookupCarol,
                        Message, OpaqueCarol, TruthTable, and_protocol,
                        lookup_protocol, measure, tabulate, tabulate_pair,
                        verify_exhaustive)
from bsmwb.errors import (CapacityError, IntegrityError, MalformedProtocol,
                          RejectedInput)
from bsmwb.polydeg import equality_table


def test_tabulate_examples():
    assert tabulate(lambda i: 0, 2).values_string() == "0000"
    assert tabulate(lambda i: bin(i).count("1") % 2, 2).values_string() == "0110"
    # EQ on (x, y) with k=4 has exactly 4 ones
    eq = equality_table(2)
    assert eq.values_string().count("1") == 4


def test_tabulate_capacity():
    with pytest.raises(CapacityError):
        tabulate(lambda i: 0, 25)


def test_truth_table_validation():
    with pytest.raises(RejectedInput):
        TruthTable(0, 0)
    with pytest.raises(RejectedInput):
        TruthTable(1, 0b100)  # three bits of data for arity 1
    with pytest.raises(RejectedInput):
        TruthTable.from_values([0, 1, 1])  # not a power of two


def test_and_protocol_verifies():
    target = tabulate(lambda i: 1 if i == 15 else 0, 4)
    rep = verify_exhaustive(and_protocol(2), target)
    assert rep.pairs_checked == 16
    assert rep.mismatches == []


def test_lookup_protocol_every_function():
    rng = random.Random(7)
    for n in (1, 2, 3):
        for _ in range(20):
            f = TruthTable(2 * n, rng.getrandbits(1 << (2 * n)))
            assert verify_exhaustive(lookup_protocol(f), f).ok


def test_lookup_protocol_random_at_n6():
    # the master identity case at the largest routine size
    rng = random.Random(123)
    for _ in range(100):
        f = TruthTable(12, rng.getrandbits(1 << 12))
        assert verify_exhaustive(lookup_protocol(f), f).ok


def test_flipped_entry_gives_exactly_one_mismatch():
    target = tabulate(lambda i: 1 if i == 15 else 0, 4)
    proto = and_protocol(2)
    # rebuild with a lookup Carol and flip the (1, 1) entry
    table = {}
    for x in range(4):
        for y in range(4):
            table[(proto.alice_map[x].symbols, proto.bob_map[y].symbols)] = \
                target.value(x + 4 * y)
    table[((1,), (1,))] ^= 1
    bad = BsmProtocol(2, proto.alice_map, proto.bob_map, LookupCarol(table))
    rep = verify_exhaustive(bad, target)
    assert rep.mismatches == [(3, 3, 1, 0)]


def test_verify_rejects_arity_mismatch():
    with pytest.raises(RejectedInput):
        verify_exhaustive(and_protocol(2), tabulate(lambda i: 0, 3))


def test_verify_capacity_limit():
    with pytest.raises(CapacityError):
        verify_exhaustive(and_protocol(2), tabulate(lambda i: 0, 4), limit=3)


def test_measure_examples():
    meas = measure(and_protocol(2))
    assert (meas.alice_length, meas.bob_length) == (1, 1)
    assert meas.cost.degree == 2
    lookup = lookup_protocol(tabulate(lambda i: 0, 6))
    meas = measure(lookup)
    assert (meas.alice_length, meas.bob_length) == (3, 3)


def test_measure_integrity_error():
    proto = and_protocol(2)
    bad_cost = CarolCost(gate_count=999, degree=2)
    carol = type(proto.carol)(proto.carol.poly, proto.carol.predicate, 1, 1,
                              declared_cost=bad_cost)
    bad = BsmProtocol(2, proto.alice_map, proto.bob_map, carol)
    with pytest.raises(IntegrityError):
        measure(bad)


def test_opaque_carol_is_unaudited_and_trusted():
    msgs = tuple(Message(2, ((x >> 0) & 1,)) for x in range(2))
    carol = OpaqueCarol(lambda a, b: a.symbols[0] & b.symbols[0],
                        CarolCost(gate_count=1))
    proto = BsmProtocol(1, msgs, msgs, carol)
    assert measure(proto).unaudited
    target = tabulate(lambda i: 1 if i == 3 else 0, 2)
    assert verify_exhaustive(proto, target).ok


def test_message_alphabet_enforced():
    with pytest.raises(MalformedProtocol):
        Message(2, (0, 2))


def test_uneven_message_lengths_rejected():
    msgs = (Message(2, (0,)), Message(2, (0, 1)))
    with pytest.raises(MalformedProtocol):
        BsmProtocol(1, msgs, msgs, LookupCarol({}))


def test_lookup_missing_entry_is_malformed():
    msgs = tuple(Message(2, (x,)) for x in range(2))
    proto = BsmProtocol(1, msgs, msgs, LookupCarol({((0,), (0,)): 1}))
    with pytest.raises(MalformedProtocol):
        verify_exhaustive(proto, tabulate(lambda i: 0, 2))


def test_circuit_builder_arithmetic():
    rng = random.Random(5)
    b = CircuitBuilder(4, 4)
    word_a = [b.alice(i) for i in range(4)]
    word_b = [b.bob(i) for i in range(4)]
    total = b.add_words(word_a, word_b)
    eq7 = b.equals_const(total, 7)
    lt = b.less_than(word_a, word_b)
    carol = b.build(eq7)
    for _ in range(50):
        x, y = rng.randrange(16), rng.randrange(16)
        vals = carol._wire_values(x, y)
        got = sum(vals[w] << i for i, w in enumerate(total))
        assert got == x + y
        assert vals[eq7] == (1 if x + y == 7 else 0)
        assert vals[lt] == (1 if x < y else 0)


def test_circuit_grid_matches_pointwise():
    # the grid fast path and the scalar path must agree gate for gate
    rng = random.Random(11)
    n = 3
    b = CircuitBuilder(n, n)
    w1 = b.bxor(b.alice(0), b.bob(1))
    w2 = b.band(b.bor(b.alice(1), b.bob(0)), b.bnot(w1))
    carol = b.build(w2)
    msgs = tuple(Message(2, tuple((x >> i) & 1 for i in range(n)))
                 for x in range(1 << n))
    proto = BsmProtocol(n, msgs, msgs, carol)
    want = tabulate(
        lambda idx: carol.evaluate(msgs[idx & 7], msgs[idx >> 3]), 2 * n)
    assert verify_exhaustive(proto, want).ok
