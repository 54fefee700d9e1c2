"""Protocol objects, exhaustive verification, and cost measurement.

A two-party simultaneous-message protocol is a triple (Alice, Bob, Carol):
Alice and Bob each map an n-bit input to a fixed-length message over Z_m,
and Carol computes the output bit from the two messages alone.  Everything
here is desk-scale and exact: correctness means zero mismatches against a
full truth table, never a statistical estimate.

Bit conventions, fixed once for the whole repository:

* variable x_1 is the least significant bit of a table index;
* a function f(x, y) on 2n bits is tabulated at index int(x) + 2^n * int(y);
* message symbol z_1 is symbol index 0 of a message tuple.

Carol evaluators come in four kinds (boolean circuit, modular polynomial
followed by a 0/1 predicate, lookup table, opaque procedure).  Circuit and
mod-2 polynomial Carols are evaluated over the whole (x, y) grid at once
using big-integer bit masks, which keeps exhaustive verification at
2n <= 24 cheap.  Opaque Carols carry their declared cost on trust and are
flagged as unaudited in measurement reports.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from typing import Callable, Optional

from .errors import CapacityError, IntegrityError, MalformedProtocol, RejectedInput

DEFAULT_LIMIT_BITS = 24


def exhaustive_limit(override: Optional[int] = None) -> int:
    if override is not None:
        return override
    env = os.environ.get("BSMWB_LIMIT_BITS")
    return int(env) if env else DEFAULT_LIMIT_BITS


# ---------------------------------------------------------------------------
# truth tables


@dataclass(frozen=True)
class TruthTable:
    """A Boolean function on `arity` bits, values packed into one int.

    Bit i of `bits` is the value at input index i.
    """

    arity: int
    bits: int

    def __post_init__(self):
        if self.arity < 1:
            raise RejectedInput("truth table arity must be >= 1")
        if self.bits < 0 or self.bits >> (1 << self.arity):
            raise RejectedInput("truth table has values beyond 2^arity entries")

    def __len__(self):
        return 1 << self.arity

    def value(self, index: int) -> int:
        return (self.bits >> index) & 1

    def values_string(self) -> str:
        return "".join(str(self.value(i)) for i in range(len(self)))

    @classmethod
    def from_values(cls, values) -> "TruthTable":
        values = list(values)
        n = (len(values)).bit_length() - 1
        if len(values) != 1 << n:
            raise RejectedInput("value list length must be a power of two")
        bits = 0
        for i, v in enumerate(values):
            if int(v) not in (0, 1):
                raise RejectedInput("truth table values must be bits")
            bits |= int(v) << i
        return cls(n, bits)

    def is_monotone(self) -> bool:
        for z in range(len(self)):
            for k in range(self.arity):
                if not (z >> k) & 1 and self.value(z) > self.value(z | (1 << k)):
                    return False
        return True


def tabulate(oracle: Callable[[int], int], k: int, limit: Optional[int] = None) -> TruthTable:
    """Materialize an oracle {0,1}^k -> {0,1} as a TruthTable."""
    if k > exhaustive_limit(limit):
        raise CapacityError(f"tabulate: k={k} exceeds exhaustive limit")
    bits = 0
    for i in range(1 << k):
        v = int(oracle(i))
        if v not in (0, 1):
            raise RejectedInput("oracle returned a non-bit")
        bits |= v << i
    return TruthTable(k, bits)


def tabulate_pair(g: TruthTable, combiner: Callable[[int, int], int]) -> TruthTable:
    """Tabulate f(x, y) = g(x * y) for a bitwise combiner on g.arity-bit halves."""
    n = g.arity
    return tabulate(lambda idx: g.value(combiner(idx & ((1 << n) - 1), idx >> n)), 2 * n)


# ---------------------------------------------------------------------------
# messages and costs


@dataclass(frozen=True)
class Message:
    """A fixed-length message over Z_m."""

    modulus: int
    symbols: tuple

    def __post_init__(self):
        if self.modulus < 2:
            raise RejectedInput("message modulus must be >= 2")
        if any(not (0 <= s < self.modulus) for s in self.symbols):
            raise MalformedProtocol("message symbol out of alphabet")

    def __len__(self):
        return len(self.symbols)


@dataclass(frozen=True)
class CarolCost:
    gate_count: int
    degree: Optional[int] = None
    depth: Optional[int] = None
    multiplication_gates: Optional[int] = None


# ---------------------------------------------------------------------------
# Carol evaluators


class CarolEvaluator:
    kind = "abstract"
    unaudited = False

    def evaluate(self, msg_a: Message, msg_b: Message) -> int:
        raise NotImplementedError

    def recompute_cost(self) -> CarolCost:
        raise NotImplementedError

    @property
    def declared_cost(self) -> CarolCost:
        return self._declared

    def check_integrity(self):
        recomputed = self.recompute_cost()
        if recomputed != self._declared:
            raise IntegrityError(
                f"declared cost {self._declared} != recomputed {recomputed}"
            )


class LookupCarol(CarolEvaluator):
    """Carol as an explicit table over message pairs."""

    kind = "lookup-table"

    def __init__(self, table: dict, declared_cost: Optional[CarolCost] = None):
        self.table = dict(table)
        self._declared = declared_cost or self.recompute_cost()

    def evaluate(self, msg_a, msg_b):
        key = (msg_a.symbols, msg_b.symbols)
        if key not in self.table:
            raise MalformedProtocol("lookup Carol has no entry for a message pair")
        return self.table[key]

    def recompute_cost(self):
        return CarolCost(gate_count=len(self.table))


AND, OR, XOR, NOT, CONST = "and", "or", "xor", "not", "const"


class CircuitCarol(CarolEvaluator):
    """Carol as a boolean netlist over the concatenated message bits.

    Wire numbering: Alice bits 0..na-1, Bob bits na..na+nb-1, then one wire
    per gate.  Gate count and depth include and/or/xor/not; constants are
    free.  Message modulus must be 2.
    """

    kind = "boolean-circuit"

    def __init__(self, na: int, nb: int, gates: list, output: int,
                 declared_cost: Optional[CarolCost] = None):
        self.na = na
        self.nb = nb
        self.gates = list(gates)
        self.output = output
        nwires = na + nb + len(self.gates)
        for gi, gate in enumerate(self.gates):
            op = gate[0]
            limit = na + nb + gi
            if op in (AND, OR, XOR):
                if not (0 <= gate[1] < limit and 0 <= gate[2] < limit):
                    raise MalformedProtocol("circuit gate reads an undefined wire")
            elif op == NOT:
                if not 0 <= gate[1] < limit:
                    raise MalformedProtocol("circuit gate reads an undefined wire")
            elif op != CONST:
                raise MalformedProtocol(f"unknown gate op {op!r}")
        if not 0 <= output < nwires:
            raise MalformedProtocol("circuit output wire undefined")
        self._declared = declared_cost or self.recompute_cost()

    def _wire_values(self, bits_a: int, bits_b: int):
        vals = [(bits_a >> i) & 1 for i in range(self.na)]
        vals += [(bits_b >> i) & 1 for i in range(self.nb)]
        for gate in self.gates:
            op = gate[0]
            if op == AND:
                vals.append(vals[gate[1]] & vals[gate[2]])
            elif op == OR:
                vals.append(vals[gate[1]] | vals[gate[2]])
            elif op == XOR:
                vals.append(vals[gate[1]] ^ vals[gate[2]])
            elif op == NOT:
                vals.append(1 - vals[gate[1]])
            else:
                vals.append(gate[1])
        return vals

    def evaluate(self, msg_a, msg_b):
        if msg_a.modulus != 2 or msg_b.modulus != 2:
            raise MalformedProtocol("circuit Carol needs mod-2 messages")
        bits_a = sum(s << i for i, s in enumerate(msg_a.symbols))
        bits_b = sum(s << i for i, s in enumerate(msg_b.symbols))
        return self._wire_values(bits_a, bits_b)[self.output]

    def evaluate_grid(self, a_masks: list, b_masks: list, ones: int) -> int:
        """Evaluate over a whole (x, y) grid encoded as bit masks."""
        vals = list(a_masks) + list(b_masks)
        for gate in self.gates:
            op = gate[0]
            if op == AND:
                vals.append(vals[gate[1]] & vals[gate[2]])
            elif op == OR:
                vals.append(vals[gate[1]] | vals[gate[2]])
            elif op == XOR:
                vals.append(vals[gate[1]] ^ vals[gate[2]])
            elif op == NOT:
                vals.append(vals[gate[1]] ^ ones)
            else:
                vals.append(ones if gate[1] else 0)
        return vals[self.output]

    def recompute_cost(self):
        counted = [g for g in self.gates if g[0] != CONST]
        depth = [0] * (self.na + self.nb)
        for gate in self.gates:
            op = gate[0]
            if op in (AND, OR, XOR):
                depth.append(1 + max(depth[gate[1]], depth[gate[2]]))
            elif op == NOT:
                depth.append(1 + depth[gate[1]])
            else:
                depth.append(0)
        return CarolCost(gate_count=len(counted), depth=depth[self.output])


class PolynomialCarol(CarolEvaluator):
    """Carol as a polynomial over Z_m in the message symbols, then a predicate.

    The polynomial's variables 0..na-1 are Alice's symbols and na..na+nb-1
    are Bob's.  `predicate` is a length-m tuple mapping Z_m to {0,1}; the
    identity predicate (0, 1) gives a plain mod-2 polynomial Carol.
    Gate count is the exact number of ring operations (multiplications
    inside monomials, additions between them) plus one predicate lookup.
    """

    kind = "modular-polynomial-with-predicate"

    def __init__(self, poly, predicate: tuple, na: int, nb: int,
                 declared_cost: Optional[CarolCost] = None):
        if len(predicate) != poly.modulus:
            raise MalformedProtocol("predicate must cover all of Z_m")
        if any(v not in (0, 1) for v in predicate):
            raise MalformedProtocol("predicate must map into {0,1}")
        if poly.variable_count != na + nb:
            raise MalformedProtocol("polynomial variable count != message lengths")
        self.poly = poly
        self.predicate = tuple(predicate)
        self.na = na
        self.nb = nb
        self._declared = declared_cost or self.recompute_cost()

    def evaluate(self, msg_a, msg_b):
        if msg_a.modulus != self.poly.modulus or msg_b.modulus != self.poly.modulus:
            raise MalformedProtocol("message modulus != polynomial modulus")
        assignment = tuple(msg_a.symbols) + tuple(msg_b.symbols)
        return self.predicate[self.poly.evaluate(assignment)]

    def evaluate_grid(self, a_masks, b_masks, ones):
        if self.poly.modulus != 2:
            raise MalformedProtocol("grid evaluation needs a mod-2 polynomial")
        vals = list(a_masks) + list(b_masks)
        acc = 0
        for mono, coeff in self.poly.monomials.items():
            if coeff % 2 == 0:
                continue
            term = ones
            for v in mono:
                term &= vals[v]
            acc ^= term
        p0, p1 = self.predicate
        if (p0, p1) == (0, 1):
            return acc
        if (p0, p1) == (1, 0):
            return acc ^ ones
        return ones if p0 else 0

    def recompute_cost(self):
        muls = sum(max(len(m) - 1, 0) for m in self.poly.monomials)
        adds = max(len(self.poly.monomials) - 1, 0)
        return CarolCost(gate_count=muls + adds + 1, degree=self.poly.degree())


class OpaqueCarol(CarolEvaluator):
    """Carol as an arbitrary deterministic procedure.

    Cost is taken on trust; measurement reports flag it as unaudited.
    """

    kind = "opaque-procedure"
    unaudited = True

    def __init__(self, fn: Callable, declared_cost: CarolCost):
        self.fn = fn
        self._declared = declared_cost

    def evaluate(self, msg_a, msg_b):
        return int(self.fn(msg_a, msg_b))

    def recompute_cost(self):
        return self._declared

    def check_integrity(self):
        pass


# ---------------------------------------------------------------------------
# protocols


@dataclass(frozen=True)
class BsmProtocol:
    """Alice map + Bob map + Carol, with n input bits per party.

    alice_map/bob_map are tuples indexed by the integer encoding of the
    input; all messages on one side must share a length and modulus.
    """

    input_arity: int
    alice_map: tuple
    bob_map: tuple
    carol: CarolEvaluator
    label: str = ""

    def __post_init__(self):
        n = self.input_arity
        if len(self.alice_map) != 1 << n or len(self.bob_map) != 1 << n:
            raise RejectedInput("message tables must be total on {0,1}^n")
        for side in (self.alice_map, self.bob_map):
            lengths = {len(m) for m in side}
            moduli = {m.modulus for m in side}
            if len(lengths) > 1 or len(moduli) > 1:
                raise MalformedProtocol("messages on one side must share length and modulus")

    @property
    def alice_length(self):
        return len(self.alice_map[0])

    @property
    def bob_length(self):
        return len(self.bob_map[0])

    @property
    def modulus(self):
        return self.alice_map[0].modulus

    def output(self, x: int, y: int) -> int:
        return self.carol.evaluate(self.alice_map[x], self.bob_map[y])


@dataclass
class VerificationReport:
    pairs_checked: int
    mismatches: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches


@dataclass
class Measurement:
    cost: CarolCost
    alice_length: int
    bob_length: int
    unaudited: bool


def _column_masks(messages, N: int):
    """Grid masks for Alice symbol bits: bit (x + N*y) set iff symbol on x."""
    length = len(messages[0])
    repeat = ((1 << (N * N)) - 1) // ((1 << N) - 1)
    masks = []
    for j in range(length):
        pattern = 0
        for x in range(N):
            if messages[x].symbols[j]:
                pattern |= 1 << x
        masks.append(pattern * repeat)
    return masks


def _row_masks(messages, N: int):
    """Grid masks for Bob symbol bits: whole x-row set iff symbol on y."""
    length = len(messages[0])
    block = (1 << N) - 1
    masks = []
    for j in range(length):
        pattern = 0
        for y in range(N):
            if messages[y].symbols[j]:
                pattern |= 1 << (N * y)
        masks.append(pattern * block)
    return masks


def verify_exhaustive(protocol: BsmProtocol, target: TruthTable,
                      limit: Optional[int] = None) -> VerificationReport:
    """Compare Carol(Alice(x), Bob(y)) against target on every pair."""
    n = protocol.input_arity
    if target.arity != 2 * n:
        raise RejectedInput(
            f"target arity {target.arity} != 2 * protocol arity {n}")
    if 2 * n > exhaustive_limit(limit):
        raise CapacityError(f"verification over {2*n} bits exceeds the limit")
    N = 1 << n
    carol = protocol.carol
    grid_capable = (
        protocol.modulus == 2
        and isinstance(carol, (CircuitCarol, PolynomialCarol))
        and (not isinstance(carol, PolynomialCarol) or carol.poly.modulus == 2)
    )
    report = VerificationReport(pairs_checked=N * N)
    if grid_capable:
        ones = (1 << (N * N)) - 1
        produced = carol.evaluate_grid(
            _column_masks(protocol.alice_map, N),
            _row_masks(protocol.bob_map, N), ones)
        diff = produced ^ target.bits
        while diff:
            low = diff & -diff
            idx = low.bit_length() - 1
            x, y = idx % N, idx // N
            report.mismatches.append((x, y, target.value(idx), (produced >> idx) & 1))
            diff ^= low
    else:
        for y in range(N):
            msg_b = protocol.bob_map[y]
            for x in range(N):
                got = carol.evaluate(protocol.alice_map[x], msg_b)
                want = target.value(x + N * y)
                if got != want:
                    report.mismatches.append((x, y, want, got))
    return report


def measure(protocol: BsmProtocol) -> Measurement:
    """Message lengths plus Carol's cost, cross-checked against the payload."""
    protocol.carol.check_integrity()
    return Measurement(
        cost=protocol.carol.declared_cost,
        alice_length=protocol.alice_length,
        bob_length=protocol.bob_length,
        unaudited=protocol.carol.unaudited,
    )


# ---------------------------------------------------------------------------
# reference protocols


def lookup_protocol(f: TruthTable) -> BsmProtocol:
    """Alice and Bob forward their inputs verbatim; Carol is the table of f."""
    if f.arity % 2:
        raise RejectedInput("lookup protocol needs an even-arity target")
    n = f.arity // 2
    N = 1 << n
    msgs = tuple(Message(2, tuple((x >> i) & 1 for i in range(n))) for x in range(N))
    table = {
        (msgs[x].symbols, msgs[y].symbols): f.value(x + N * y)
        for x in range(N) for y in range(N)
    }
    return BsmProtocol(n, msgs, msgs, LookupCarol(table), label="lookup")


def and_protocol(n: int) -> BsmProtocol:
    """Each party sends the AND of its bits; Carol multiplies the two bits."""
    from .polydeg import ModularPolynomial

    N = 1 << n
    msgs = tuple(Message(2, (1 if x == N - 1 else 0,)) for x in range(N))
    poly = ModularPolynomial(2, 2, {(0, 1): 1})
    carol = PolynomialCarol(poly, (0, 1), 1, 1)
    return BsmProtocol(n, msgs, msgs, carol, label=f"and_{n}")


class CircuitBuilder:
    """Incremental netlist builder for circuit Carols.

    Exposes single gates plus the word-level helpers (adders, comparators)
    used by protocols whose Carol must compute Hamming weights or select a
    nearest codeword.
    """

    def __init__(self, na: int, nb: int):
        self.na = na
        self.nb = nb
        self.gates = []
        self._zero = None
        self._one = None

    def alice(self, j):
        return j

    def bob(self, j):
        return self.na + j

    def _emit(self, gate):
        self.gates.append(gate)
        return self.na + self.nb + len(self.gates) - 1

    def const(self, v):
        cache = "_one" if v else "_zero"
        if getattr(self, cache) is None:
            setattr(self, cache, self._emit((CONST, 1 if v else 0)))
        return getattr(self, cache)

    def band(self, a, b):
        return self._emit((AND, a, b))

    def bor(self, a, b):
        return self._emit((OR, a, b))

    def bxor(self, a, b):
        return self._emit((XOR, a, b))

    def bnot(self, a):
        return self._emit((NOT, a))

    def reduce_or(self, wires):
        if not wires:
            return self.const(0)
        acc = wires[0]
        for w in wires[1:]:
            acc = self.bor(acc, w)
        return acc

    def reduce_and(self, wires):
        if not wires:
            return self.const(1)
        acc = wires[0]
        for w in wires[1:]:
            acc = self.band(acc, w)
        return acc

    def reduce_xor(self, wires):
        if not wires:
            return self.const(0)
        acc = wires[0]
        for w in wires[1:]:
            acc = self.bxor(acc, w)
        return acc

    def half_adder(self, a, b):
        return self.bxor(a, b), self.band(a, b)

    def full_adder(self, a, b, c):
        s1, c1 = self.half_adder(a, b)
        s2, c2 = self.half_adder(s1, c)
        return s2, self.bor(c1, c2)

    def add_words(self, xs, ys):
        """Ripple-carry addition of two LSB-first wire words."""
        width = max(len(xs), len(ys))
        xs = list(xs) + [self.const(0)] * (width - len(xs))
        ys = list(ys) + [self.const(0)] * (width - len(ys))
        out, carry = [], self.const(0)
        for a, b in zip(xs, ys):
            s, carry = self.full_adder(a, b, carry)
            out.append(s)
        out.append(carry)
        return out

    def popcount(self, wires):
        """Adder-tree Hamming weight of a wire list, LSB-first word."""
        words = [[w] for w in wires]
        if not words:
            return [self.const(0)]
        while len(words) > 1:
            nxt = []
            for i in range(0, len(words) - 1, 2):
                nxt.append(self.add_words(words[i], words[i + 1]))
            if len(words) % 2:
                nxt.append(words[-1])
            words = nxt
        return words[0]

    def less_than(self, xs, ys):
        """Strict x < y over LSB-first words."""
        width = max(len(xs), len(ys))
        xs = list(xs) + [self.const(0)] * (width - len(xs))
        ys = list(ys) + [self.const(0)] * (width - len(ys))
        lt = self.const(0)
        for a, b in zip(xs, ys):  # from LSB up; final value dominated by MSB
            a_lt_b = self.band(self.bnot(a), b)
            eq = self.bnot(self.bxor(a, b))
            lt = self.bor(a_lt_b, self.band(eq, lt))
        return lt

    def equals_const(self, xs, value):
        bits = []
        for i, w in enumerate(xs):
            bit = (value >> i) & 1
            bits.append(w if bit else self.bnot(w))
        if value >> len(xs):
            return self.const(0)
        return self.reduce_and(bits)

    def build(self, output) -> CircuitCarol:
        return CircuitCarol(self.na, self.nb, self.gates, output)
