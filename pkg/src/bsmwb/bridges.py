"""Conversions among message protocols, instance hiding, PIR, and smooth codes.

Everything in this module is zero-error and exactly private at desk scale:
randomness spaces are small enough to enumerate, so correctness is checked
on every (input, randomness) pair and privacy by comparing whole query
distributions for equality, never statistically.

The chain, in both directions where constructive:

  protocol for g(x^y)  ->  instance hiding for g     (secret-share x as
                                                      (x^r, r))
  instance hiding      ->  protocol                  (oracles become the
    with uniform queries                              parties; the referee
                                                      replays the combiner
                                                      on any preimage)
  split encoding + protocol -> instance hiding       (query with the two
                                                      halves of the split)
  PIR                  ->  instance hiding            (database = the truth
                                                      table)
  2-query perfectly smooth code -> PIR                (servers answer one
                                                      codeword position)
"""

from __future__ import annotations

import functools
from collections import Counter
from dataclasses import dataclass
from typing import Callable

from .core import (BsmProtocol, CarolCost, Message, OpaqueCarol, TruthTable,
                   measure, tabulate_pair, verify_exhaustive)
from .errors import CapacityError, RejectedInput

RANDOMNESS_LIMIT_BITS = 20


def _check_rand(bits: int):
    if bits > RANDOMNESS_LIMIT_BITS:
        raise CapacityError(f"randomness space 2^{bits} beyond the enumeration limit")


# ---------------------------------------------------------------------------
# instance hiding


@dataclass
class IhScheme:
    """Two-oracle instance hiding scheme with enumerable randomness.

    Queries are integers; answers are symbol tuples of `answer_bits`
    entries.  Construction verifies zero-error correctness on every
    (x, randomness) pair and exact input-independence of each oracle's
    query distribution.
    """

    input_arity: int
    rand_bits: int
    answer_bits: int
    henry_query: Callable
    oracle_a: Callable
    oracle_b: Callable
    henry_combine: Callable
    henry_size: int
    target: TruthTable
    label: str = ""
    _skip_checks: bool = False

    def __post_init__(self):
        if self._skip_checks:
            return
        _check_rand(self.rand_bits)
        if self.target.arity != self.input_arity:
            raise RejectedInput("target arity mismatch")
        marg_a, marg_b = None, None
        for x in range(1 << self.input_arity):
            ca, cb = Counter(), Counter()
            for r in range(1 << self.rand_bits):
                qa, qb = self.henry_query(x, r)
                ca[qa] += 1
                cb[qb] += 1
                got = self.henry_combine(x, r, self.oracle_a(qa), self.oracle_b(qb))
                if got != self.target.value(x):
                    raise RejectedInput(
                        f"scheme output wrong at x={x}, r={r}: {got}")
            if marg_a is None:
                marg_a, marg_b = ca, cb
            elif ca != marg_a or cb != marg_b:
                side = "A" if ca != marg_a else "B"
                raise RejectedInput(
                    f"oracle {side} query distribution depends on the input (x={x})")

    def run(self, x: int, r: int) -> int:
        qa, qb = self.henry_query(x, r)
        return self.henry_combine(x, r, self.oracle_a(qa), self.oracle_b(qb))


def xor_bsm_to_ih(protocol: BsmProtocol, g: TruthTable) -> IhScheme:
    """Instance hiding for g from a protocol computing g(x ^ y).

    The input is shared as (x ^ r, r); both query marginals are exactly
    uniform.  The combiner replays the protocol's referee and ignores
    (x, r).
    """
    n = g.arity
    if protocol.input_arity != n:
        raise RejectedInput("protocol arity must match g")
    target = tabulate_pair(g, lambda a, b: a ^ b)
    rep = verify_exhaustive(protocol, target)
    if not rep.ok:
        raise RejectedInput(
            f"protocol does not compute g(x^y): {len(rep.mismatches)} mismatches")
    carol = protocol.carol
    size = measure(protocol).cost.gate_count

    return IhScheme(
        input_arity=n,
        rand_bits=n,
        answer_bits=max(protocol.alice_length, protocol.bob_length),
        henry_query=lambda x, r: (x ^ r, r),
        oracle_a=lambda q: protocol.alice_map[q].symbols,
        oracle_b=lambda q: protocol.bob_map[q].symbols,
        henry_combine=lambda x, r, ans_a, ans_b: carol.evaluate(
            Message(protocol.modulus, ans_a), Message(protocol.modulus, ans_b)),
        henry_size=size,
        target=g,
        label=f"xor_ih[{protocol.label}]")


# ---------------------------------------------------------------------------
# split encodings as instance hiding


@dataclass
class SplitEncoding:
    """An enumerable randomized split map x -> (a(x), b(x)) on equal-width parts."""

    input_arity: int
    rand_bits: int
    part_bits: int
    apply: Callable  # (x, r) -> (a, b)


def xor_split_encoding(n: int) -> SplitEncoding:
    """The canonical private split: a = x ^ r, b = r."""
    return SplitEncoding(n, n, n, lambda x, r: (x ^ r, r))


def identity_split_encoding(n: int) -> SplitEncoding:
    """A deliberately non-private split (both parts equal the input)."""
    return SplitEncoding(n, 0, n, lambda x, r: (x, x))


def check_split_privacy(enc: SplitEncoding):
    """Exact marginal comparison; raises with a witness on failure."""
    _check_rand(enc.rand_bits)
    base_a, base_b = None, None
    for x in range(1 << enc.input_arity):
        ca, cb = Counter(), Counter()
        for r in range(1 << enc.rand_bits):
            a, b = enc.apply(x, r)
            ca[a] += 1
            cb[b] += 1
        if base_a is None:
            base_a, base_b = ca, cb
        elif ca != base_a or cb != base_b:
            raise RejectedInput(
                f"split encoding leaks: marginal at x={x} differs from x=0")


def splithide_bsm_to_ih(enc: SplitEncoding, protocol: BsmProtocol,
                        g: TruthTable) -> IhScheme:
    """Instance hiding for g: query the two halves of a private split to
    oracles that answer with the protocol's messages, then run the referee.

    Refuses non-private encodings before looking at correctness.
    """
    check_split_privacy(enc)
    if protocol.input_arity != enc.part_bits:
        raise RejectedInput("protocol arity must match the split part width")
    if g.arity != enc.input_arity:
        raise RejectedInput("target arity must match the split input width")
    carol = protocol.carol
    return IhScheme(
        input_arity=enc.input_arity,
        rand_bits=enc.rand_bits,
        answer_bits=max(protocol.alice_length, protocol.bob_length),
        henry_query=enc.apply,
        oracle_a=lambda q: protocol.alice_map[q].symbols,
        oracle_b=lambda q: protocol.bob_map[q].symbols,
        henry_combine=lambda x, r, ans_a, ans_b: carol.evaluate(
            Message(protocol.modulus, ans_a), Message(protocol.modulus, ans_b)),
        henry_size=measure(protocol).cost.gate_count,
        target=g,
        label="split_ih")


# ---------------------------------------------------------------------------
# instance hiding back to a protocol


def ih_to_bsm(scheme: IhScheme) -> tuple:
    """Protocol for f(q_a, q_b) := g(x) where x generates the query pair.

    Requires both query marginals to be exactly uniform over the full
    query space {0,1}^m.  The parties send their input along with the
    oracle answer; the referee looks up any (x, r) preimage of the pair
    and replays the combiner (well-definedness is checked first, and a
    colliding witness is reported).  Unrealized query pairs evaluate to 0.

    Returns (protocol, f_table).
    """
    n, rb = scheme.input_arity, scheme.rand_bits
    seen = {}
    counts_a, counts_b = Counter(), Counter()
    for x in range(1 << n):
        for r in range(1 << rb):
            qa, qb = scheme.henry_query(x, r)
            counts_a[qa] += 1
            counts_b[qb] += 1
            val = scheme.target.value(x)
            if (qa, qb) in seen and seen[(qa, qb)][0] != val:
                prev = seen[(qa, qb)]
                raise RejectedInput(
                    f"query pair {(qa, qb)} generated by x={prev[1]} (value "
                    f"{prev[0]}) and x={x} (value {val}); f is ill-defined")
            seen[(qa, qb)] = (val, x, r)
    m = max(max(counts_a), max(counts_b)).bit_length()
    if m == 0:
        raise RejectedInput("degenerate query space")
    total = (1 << n) * (1 << rb)
    for counts in (counts_a, counts_b):
        if len(counts) != 1 << m or len(set(counts.values())) != 1:
            raise RejectedInput("query marginal is not uniform over {0,1}^m")
        if next(iter(counts.values())) * (1 << m) != total:
            raise RejectedInput("query marginal is not uniform over {0,1}^m")

    f_bits = 0
    for (qa, qb), (val, _, _) in seen.items():
        f_bits |= val << (qa + (qb << m))
    f = TruthTable(2 * m, f_bits)

    def pack(q, answer):
        return Message(2, tuple((q >> i) & 1 for i in range(m)) + tuple(answer))

    msgs_a = tuple(pack(q, scheme.oracle_a(q)) for q in range(1 << m))
    msgs_b = tuple(pack(q, scheme.oracle_b(q)) for q in range(1 << m))

    def referee(msg_a, msg_b):
        qa = sum(bit << i for i, bit in enumerate(msg_a.symbols[:m]))
        qb = sum(bit << i for i, bit in enumerate(msg_b.symbols[:m]))
        hit = seen.get((qa, qb))
        if hit is None:
            return 0
        _, x, r = hit
        return scheme.henry_combine(x, r, tuple(msg_a.symbols[m:]),
                                    tuple(msg_b.symbols[m:]))

    carol = OpaqueCarol(referee, CarolCost(gate_count=scheme.henry_size))
    protocol = BsmProtocol(m, msgs_a, msgs_b, carol,
                           label=f"ih_bsm[{scheme.label}]")
    rep = verify_exhaustive(protocol, f)
    if not rep.ok:
        raise RejectedInput("reconstructed protocol fails verification")
    return protocol, f


# ---------------------------------------------------------------------------
# PIR


@dataclass
class PirScheme:
    """Two-server PIR with enumerable client randomness.

    Databases are length-d bit strings packed into ints; queries are
    integers; answers are bit tuples.  Construction verifies correct
    reconstruction for every database and index, and exact independence of
    each server's query distribution from the index.
    """

    database_length: int
    answer_bits: int
    rand_bits: int
    client_query: Callable
    server: Callable  # (db_bits, query) -> answer tuple
    client_combine: Callable  # (index, rand, ans_a, ans_b) -> bit
    label: str = ""

    def __post_init__(self):
        _check_rand(self.rand_bits)
        if self.database_length > 12:
            raise CapacityError("database sweep beyond the exhaustive limit")
        marg_a, marg_b = None, None
        for i in range(self.database_length):
            ca, cb = Counter(), Counter()
            for r in range(1 << self.rand_bits):
                qa, qb = self.client_query(i, r)
                ca[qa] += 1
                cb[qb] += 1
            if marg_a is None:
                marg_a, marg_b = ca, cb
            elif ca != marg_a or cb != marg_b:
                raise RejectedInput(
                    f"server query distribution depends on the index (i={i})")
        for db in range(1 << self.database_length):
            for i in range(self.database_length):
                for r in range(1 << self.rand_bits):
                    qa, qb = self.client_query(i, r)
                    got = self.client_combine(i, r, self.server(db, qa),
                                              self.server(db, qb))
                    if got != (db >> i) & 1:
                        raise RejectedInput(
                            f"PIR reconstruction wrong at db={db:b}, i={i}, r={r}")

    def retrieve(self, db: int, i: int, r: int) -> int:
        qa, qb = self.client_query(i, r)
        return self.client_combine(i, r, self.server(db, qa), self.server(db, qb))


def pir_to_ih(pir: PirScheme, f: TruthTable) -> IhScheme:
    """Instance hiding for f: the database is f's truth table, the input is
    the index."""
    if 1 << f.arity > pir.database_length:
        raise RejectedInput("function table does not fit in the database")
    db = f.bits

    return IhScheme(
        input_arity=f.arity,
        rand_bits=pir.rand_bits,
        answer_bits=pir.answer_bits,
        henry_query=lambda x, r: pir.client_query(x, r),
        oracle_a=lambda q: pir.server(db, q),
        oracle_b=lambda q: pir.server(db, q),
        henry_combine=lambda x, r, aa, ab: pir.client_combine(x, r, aa, ab),
        henry_size=0,
        target=f,
        label=f"pir_ih[{pir.label}]")


# ---------------------------------------------------------------------------
# smooth codes


@dataclass
class SmoothCode:
    """A 2-query zero-error code whose decoder queries are each uniform.

    encode maps a message (packed bits) to a tuple of codeword symbols;
    decoder_queries(i, r) gives the two positions read to recover bit i,
    and decoder_combine(i, r, s1, s2) the reconstruction.
    """

    message_length: int
    codeword_length: int
    answer_bits: int
    encode: Callable
    rand_bits: int
    decoder_queries: Callable
    decoder_combine: Callable
    label: str = ""

    def verify(self):
        _check_rand(self.rand_bits)
        if self.message_length > 12:
            raise CapacityError("message sweep beyond the exhaustive limit")
        for i in range(self.message_length):
            c1, c2 = Counter(), Counter()
            for r in range(1 << self.rand_bits):
                j1, j2 = self.decoder_queries(i, r)
                c1[j1] += 1
                c2[j2] += 1
            for slot, c in (("first", c1), ("second", c2)):
                if len(c) != self.codeword_length or len(set(c.values())) != 1:
                    raise RejectedInput(
                        f"decoder {i}: {slot} query is not uniform over positions")
        for msg in range(1 << self.message_length):
            word = self.encode(msg)
            for i in range(self.message_length):
                for r in range(1 << self.rand_bits):
                    j1, j2 = self.decoder_queries(i, r)
                    if self.decoder_combine(i, r, word[j1], word[j2]) != (msg >> i) & 1:
                        raise RejectedInput(
                            f"decoding error at msg={msg:b}, i={i}, r={r}")
        return self


def hadamard_code(n: int) -> SmoothCode:
    """All parities of the message; bit i decodes from positions (r, r ^ e_i)."""

    def encode(msg):
        return tuple((msg & a).bit_count() & 1 for a in range(1 << n))

    return SmoothCode(
        message_length=n,
        codeword_length=1 << n,
        answer_bits=1,
        encode=encode,
        rand_bits=n,
        decoder_queries=lambda i, r: (r, r ^ (1 << i)),
        decoder_combine=lambda i, r, s1, s2: s1 ^ s2,
        label=f"hadamard_{n}")


def repetition_code_1bit() -> SmoothCode:
    """Degenerate length-1 code for a 1-bit message; both queries hit 0."""
    return SmoothCode(
        message_length=1,
        codeword_length=1,
        answer_bits=1,
        encode=lambda msg: (msg & 1,),
        rand_bits=0,
        decoder_queries=lambda i, r: (0, 0),
        decoder_combine=lambda i, r, s1, s2: s1,
        label="repetition_1")


def smooth_ldc_to_pir(code: SmoothCode) -> PirScheme:
    """Two-server PIR: each server encodes the database and answers the one
    position the decoder asks it."""
    code.verify()
    encode = functools.lru_cache(maxsize=None)(code.encode)

    return PirScheme(
        database_length=code.message_length,
        answer_bits=code.answer_bits,
        rand_bits=code.rand_bits,
        client_query=lambda i, r: code.decoder_queries(i, r),
        server=lambda db, q: _as_tuple(encode(db)[q]),
        client_combine=lambda i, r, aa, ab: code.decoder_combine(
            i, r, _from_tuple(aa), _from_tuple(ab)),
        label=f"pir[{code.label}]")


def _as_tuple(symbol):
    return symbol if isinstance(symbol, tuple) else (symbol,)


def _from_tuple(answer):
    return answer[0] if len(answer) == 1 else answer
