"""Protocols for bitwise-combined targets g(x|y), g(x&y), g(x^y).

The central machinery is a split evaluation of a unate DNF on z = x | y.
A term with positive part P and negative part Q fires iff every k in P
has x_k or y_k set and every k in Q has both clear.  Expanding the
positive part over the two parties,

    term  =  OR over disjoint T1, T2 with T1 u T2 = P of
             [X_AND(T1) and NX(Q)]  and  [Y_AND(T2) and NY(Q)],

and in any split one side has at most floor(|P|/2) elements, so it
suffices to catalog atoms X_AND(T) and NX(Q) for small T.  Alice sends
one bit per catalog entry (T, Q): the atom itself, plus an aggregate that
ORs, over all terms with negative part Q containing T, the value of her
*rest* of the term.  Carol pairs each atom with the other party's
aggregate and takes the big OR.  For a monotone DNF every Q is empty and
this is exactly the half-split protocol with message size
2*C(n, <= floor(w/2)); the unate extension threads the negative part
through both atoms and aggregates unchanged.

On top of that block primitive:

* short-DNF protocols for g(x&y), one (alice, bob) conjunction pair per
  term (negative literals expand over subset splits, since !(x&y) needs a
  zero on at least one side);
* the monotone protocol that handles terms wider than 2n/3 by shipping
  raw inputs and letting Carol finish the wide disjunction directly;
* the alternation decomposition g = b xor g_1 xor ... xor g_k into
  monotone layers g_i = [alternation-to-x >= i], each run through the
  monotone protocol, with Carol XOR-ing the layer outputs;
* weight-slice unate functions agreeing with g on each Hamming level, and
  their generalization to spheres around covering-code words, where Carol
  computes x | y, locates the nearest codeword (ties to the lowest index)
  with an adder-tree distance comparator, and selects that sphere's
  sub-protocol output;
* the reverse direction: from any protocol for g(x^y), a plain evaluator
  for g by hardwiring half of each party's input to zero.

All size bounds are reported as measured numbers next to the formula
values; at these input sizes the constants dominate and nothing is
asserted about ratios.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

from .core import (NOT, BsmProtocol, CircuitBuilder, CircuitCarol, LookupCarol,
                   Message, TruthTable, measure, tabulate_pair, verify_exhaustive)
from .errors import CapacityError, RejectedInput, VerificationMismatch


# ---------------------------------------------------------------------------
# DNFs


@dataclass(frozen=True)
class Dnf:
    """Disjunctive normal form; terms are (positive set, negative set) pairs."""

    variable_count: int
    terms: tuple

    def __post_init__(self):
        norm = []
        for pos, neg in self.terms:
            pos, neg = frozenset(pos), frozenset(neg)
            if pos & neg:
                raise RejectedInput("term contains a variable and its negation")
            if any(not 0 <= v < self.variable_count for v in pos | neg):
                raise RejectedInput("term variable out of range")
            norm.append((pos, neg))
        object.__setattr__(self, "terms", tuple(norm))

    @property
    def width(self) -> int:
        return max((len(p) + len(q) for p, q in self.terms), default=0)

    @property
    def monotone(self) -> bool:
        return all(not q for _, q in self.terms)

    def unate_orientation(self) -> Optional[tuple]:
        """Per-variable sign (+1 positive, -1 negated, 0 unused), or None."""
        signs = [0] * self.variable_count
        for pos, neg in self.terms:
            for v in pos:
                if signs[v] < 0:
                    return None
                signs[v] = 1
            for v in neg:
                if signs[v] > 0:
                    return None
                signs[v] = -1
        return tuple(signs)

    def evaluate(self, z: int) -> int:
        for pos, neg in self.terms:
            if all((z >> v) & 1 for v in pos) and not any((z >> v) & 1 for v in neg):
                return 1
        return 0

    def table(self) -> TruthTable:
        from .core import tabulate

        return tabulate(self.evaluate, self.variable_count)


def minimal_monotone_dnf(g: TruthTable) -> Dnf:
    """Minimal true points of a monotone function, as positive terms."""
    if not g.is_monotone():
        raise RejectedInput("function is not monotone")
    terms = []
    for z in range(len(g)):
        if not g.value(z):
            continue
        if all(not g.value(z ^ (1 << k)) for k in range(g.arity) if (z >> k) & 1):
            terms.append((frozenset(k for k in range(g.arity) if (z >> k) & 1),
                          frozenset()))
    return Dnf(g.arity, tuple(terms))


def minterm_dnf(g: TruthTable) -> Dnf:
    """The full-width minterm expansion (exact for any g)."""
    n = g.arity
    terms = []
    for z in range(len(g)):
        if g.value(z):
            terms.append((frozenset(k for k in range(n) if (z >> k) & 1),
                          frozenset(k for k in range(n) if not (z >> k) & 1)))
    return Dnf(n, tuple(terms))


# ---------------------------------------------------------------------------
# the split block for unate DNFs on x | y


def _atom_bit(x: int, small, neg) -> int:
    if any(not (x >> v) & 1 for v in small):
        return 0
    if any((x >> v) & 1 for v in neg):
        return 0
    return 1


def _or_block_index(dnf: Dnf) -> list:
    """Catalog of (small positive tuple, full negative tuple) atom indices."""
    half = dnf.width // 2
    index = set()
    for pos, neg in dnf.terms:
        neg_t = tuple(sorted(neg))
        for size in range(min(half, len(pos)) + 1):
            for small in itertools.combinations(sorted(pos), size):
                index.add((small, neg_t))
    return sorted(index)


def _or_block_messages(dnf: Dnf, index: list, x: int) -> list:
    """Atom bits then aggregate bits for one party's input."""
    atoms = [_atom_bit(x, small, neg) for small, neg in index]
    aggs = []
    for small, neg in index:
        small_set, neg_set = set(small), frozenset(neg)
        hit = 0
        for pos, neg2 in dnf.terms:
            if neg2 == neg_set and small_set <= pos:
                if _atom_bit(x, tuple(pos - small_set), neg):
                    hit = 1
                    break
        aggs.append(hit)
    return atoms + aggs


def _or_block_wire(builder: CircuitBuilder, index_len: int,
                   a_off: int, b_off: int) -> int:
    """Carol wiring for one block given each party's segment offset."""
    pairs = []
    for i in range(index_len):
        a_atom = builder.alice(a_off + i)
        a_agg = builder.alice(a_off + index_len + i)
        b_atom = builder.bob(b_off + i)
        b_agg = builder.bob(b_off + index_len + i)
        pairs.append(builder.band(a_atom, b_agg))
        pairs.append(builder.band(a_agg, b_atom))
    return builder.reduce_or(pairs)


def unate_width_protocol_or(dnf: Dnf) -> BsmProtocol:
    """Split protocol computing dnf(x | y) for a unate DNF."""
    if dnf.unate_orientation() is None:
        raise RejectedInput("DNF is not unate")
    n = dnf.variable_count
    index = _or_block_index(dnf)
    msgs = tuple(Message(2, tuple(_or_block_messages(dnf, index, x)))
                 for x in range(1 << n))
    builder = CircuitBuilder(2 * len(index), 2 * len(index))
    out = _or_block_wire(builder, len(index), 0, 0)
    return BsmProtocol(n, msgs, msgs, builder.build(out),
                       label=f"or_width_{dnf.width}")


def monotone_width_protocol_or(g: Dnf, n: Optional[int] = None,
                               w: Optional[int] = None) -> BsmProtocol:
    """The half-split protocol for a monotone DNF of width w on x | y."""
    if not g.monotone:
        raise RejectedInput("DNF must be monotone")
    if n is not None and n != g.variable_count:
        raise RejectedInput("variable count mismatch")
    if w is not None and g.width > w:
        raise RejectedInput(f"DNF width {g.width} exceeds declared bound {w}")
    return unate_width_protocol_or(g)


# ---------------------------------------------------------------------------
# short DNF protocols for the AND combiner


def _and_term_pairs(pos, neg):
    """(alice literal sets, bob literal sets) whose conjunction pairs cover
    the term on z = x & y.  A negative literal !(x_k & y_k) needs a zero on
    at least one side, so it expands over the subsets of neg."""
    pos = frozenset(pos)
    neg = tuple(sorted(neg))
    out = []
    for mask in range(1 << len(neg)):
        n1 = frozenset(neg[i] for i in range(len(neg)) if (mask >> i) & 1)
        n2 = frozenset(neg) - n1
        out.append(((pos, n1), (pos, n2)))
    return out


def dnf_protocol_and(g: Dnf) -> BsmProtocol:
    """Per-term conjunction protocol for f(x, y) = g(x & y).

    For a positive (monotone) DNF each party sends exactly one bit per
    term; negative literals multiply a term into 2^|neg| aligned pairs.
    """
    n = g.variable_count
    pairs = []
    for pos, neg in g.terms:
        pairs.extend(_and_term_pairs(pos, neg))

    def side_bits(x, which):
        bits = []
        for pa, pb in pairs:
            p, q = pa if which == 0 else pb
            bits.append(1 if all((x >> v) & 1 for v in p)
                        and not any((x >> v) & 1 for v in q) else 0)
        return tuple(bits)

    msgs_a = tuple(Message(2, side_bits(x, 0)) for x in range(1 << n))
    msgs_b = tuple(Message(2, side_bits(y, 1)) for y in range(1 << n))
    builder = CircuitBuilder(len(pairs), len(pairs))
    wires = [builder.band(builder.alice(i), builder.bob(i)) for i in range(len(pairs))]
    out = builder.reduce_or(wires)
    return BsmProtocol(n, msgs_a, msgs_b, builder.build(out),
                       label=f"dnf_and_{len(g.terms)}t")


# ---------------------------------------------------------------------------
# monotone functions, arbitrary width


def _wide_term_wire(builder: CircuitBuilder, pos, a_raw: int, b_raw: int) -> int:
    ors = [builder.bor(builder.alice(a_raw + v), builder.bob(b_raw + v))
           for v in sorted(pos)]
    return builder.reduce_and(ors)


@dataclass
class _MonotoneLayout:
    """One monotone function's plan inside a larger message."""

    index: list
    narrow: Dnf
    wide_terms: list


def _monotone_layout(g: TruthTable) -> _MonotoneLayout:
    dnf = minimal_monotone_dnf(g)
    n = g.arity
    narrow = [t for t in dnf.terms if 3 * len(t[0]) <= 2 * n]
    wide = [t for t in dnf.terms if 3 * len(t[0]) > 2 * n]
    narrow_dnf = Dnf(n, tuple(narrow))
    return _MonotoneLayout(_or_block_index(narrow_dnf), narrow_dnf,
                           [p for p, _ in wide])


def _assemble_or_protocol(n: int, layouts: list, finish) -> BsmProtocol:
    """Concatenate per-layer block segments plus one raw block; wire Carol.

    `finish(builder, layer_outputs, a_raw, b_raw)` returns the output wire.
    """
    seg_lengths = [2 * len(lay.index) for lay in layouts]
    total = sum(seg_lengths) + n

    def message(x):
        bits = []
        for lay in layouts:
            bits.extend(_or_block_messages(lay.narrow, lay.index, x))
        bits.extend((x >> k) & 1 for k in range(n))
        return Message(2, tuple(bits))

    msgs = tuple(message(x) for x in range(1 << n))
    builder = CircuitBuilder(total, total)
    raw = total - n
    outs = []
    offset = 0
    for lay in layouts:
        block = _or_block_wire(builder, len(lay.index), offset, offset)
        wides = [_wide_term_wire(builder, pos, raw, raw) for pos in lay.wide_terms]
        outs.append(builder.reduce_or([block] + wides))
        offset += 2 * len(lay.index)
    out = finish(builder, outs, raw, raw)
    return BsmProtocol(n, msgs, msgs, builder.build(out))


def monotone_protocol_or(g: TruthTable) -> BsmProtocol:
    """Protocol for g(x | y), any monotone g.

    Terms of the minimal DNF with at most 2n/3 variables run through the
    half-split block; wider terms are finished by Carol from the raw
    inputs, which both parties append to their messages.
    """
    layout = _monotone_layout(g)
    proto = _assemble_or_protocol(
        g.arity, [layout], lambda b, outs, ar, br: outs[0])
    return BsmProtocol(proto.input_arity, proto.alice_map, proto.bob_map,
                       proto.carol, label="monotone_or")


# ---------------------------------------------------------------------------
# alternation


@dataclass(frozen=True)
class AlternationDecomposition:
    """g = base xor parts[0] xor ... xor parts[k-1], each part monotone."""

    base: int
    parts: tuple
    source: TruthTable

    def __post_init__(self):
        for part in self.parts:
            if not part.is_monotone():
                raise RejectedInput("decomposition part is not monotone")
        for z in range(len(self.source)):
            acc = self.base
            for part in self.parts:
                acc ^= part.value(z)
            if acc != self.source.value(z):
                raise RejectedInput("decomposition does not telescope to g")
        if max(_alternation_profile(self.source)) != len(self.parts):
            raise RejectedInput("part count differs from the alternation of g")

    @property
    def alternation(self) -> int:
        return len(self.parts)


def _alternation_profile(g: TruthTable) -> list:
    """a(z) = max number of value changes along increasing chains 0 -> z."""
    n = g.arity
    a = [0] * (1 << n)
    for z in range(1, 1 << n):
        best = 0
        for k in range(n):
            if (z >> k) & 1:
                prev = z ^ (1 << k)
                cand = a[prev] + (g.value(prev) != g.value(z))
                best = max(best, cand)
        a[z] = best
    return a


def alternation_decompose(g: TruthTable) -> AlternationDecomposition:
    """Layer g into monotone threshold functions of its alternation profile.

    With a(z) the profile, every chain to z flips parity a(z) mod 2 times,
    a is monotone, and its maximum equals the alternation of g; the layers
    g_i(z) = [a(z) >= i] are therefore monotone and telescope back to g.
    """
    if g.arity > 20:
        raise CapacityError("alternation profile beyond the exhaustive limit")
    prof = _alternation_profile(g)
    k = max(prof)
    parts = []
    for i in range(1, k + 1):
        parts.append(TruthTable.from_values([1 if prof[z] >= i else 0
                                             for z in range(len(prof))]))
    return AlternationDecomposition(base=g.value(0), parts=tuple(parts), source=g)


def alternation_protocol_or(g: TruthTable) -> BsmProtocol:
    """Protocol for g(x | y) for arbitrary g: XOR of monotone layers."""
    decomp = alternation_decompose(g)
    layouts = [_monotone_layout(part) for part in decomp.parts]

    def finish(builder, outs, a_raw, b_raw):
        acc = builder.reduce_xor(outs)
        if decomp.base:
            acc = builder.bnot(acc)
        return acc

    proto = _assemble_or_protocol(g.arity, layouts, finish)
    return BsmProtocol(proto.input_arity, proto.alice_map, proto.bob_map,
                       proto.carol, label=f"alt_or_k{decomp.alternation}")


# ---------------------------------------------------------------------------
# weight slices and covering codes


def weight_slice_unate(g: TruthTable) -> list:
    """Unate DNFs g_0..g_n, g_i agreeing with g on weight-i inputs.

    Low slices use positive terms on the support, high slices negative
    terms on the complement, so every slice has width <= n/2.
    """
    if g.arity > 16:
        raise CapacityError("weight slices beyond the exhaustive limit")
    n = g.arity
    slices = []
    for i in range(n + 1):
        terms = []
        for w in range(len(g)):
            if bin(w).count("1") != i or not g.value(w):
                continue
            support = frozenset(k for k in range(n) if (w >> k) & 1)
            if 2 * i <= n:
                terms.append((support, frozenset()))
            else:
                terms.append((frozenset(), frozenset(range(n)) - support))
        slices.append(Dnf(n, tuple(terms)))
    return slices


@dataclass(frozen=True)
class CoveringCode:
    """Codewords whose radius-r Hamming balls cover {0,1}^length."""

    length: int
    radius: int
    codewords: tuple

    def __post_init__(self):
        if self.radius > self.length:
            raise RejectedInput("radius exceeds the code length")
        if not self.codewords:
            raise RejectedInput("covering code needs at least one codeword")
        if any(not 0 <= c < 1 << self.length for c in self.codewords):
            raise RejectedInput("codeword out of range")
        if self.length <= 20:
            covered = 0
            for c in self.codewords:
                covered |= _ball_mask(c, self.radius, self.length)
            if covered != (1 << (1 << self.length)) - 1:
                raise RejectedInput("balls do not cover the cube")

    @property
    def size(self):
        return len(self.codewords)


def _low_block_pattern(n: int, k: int) -> int:
    """Mask of cube points whose k-th coordinate is 0, over 2^n positions."""
    block = 1 << k
    repeat = ((1 << (1 << n)) - 1) // ((1 << (2 * block)) - 1)
    return repeat * ((1 << block) - 1)


def _xor_translate(mask: int, c: int, n: int) -> int:
    """Image of a point-set mask under z -> z ^ c."""
    for k in range(n):
        if (c >> k) & 1:
            sel = _low_block_pattern(n, k)
            shift = 1 << k
            mask = ((mask & sel) << shift) | ((mask >> shift) & sel)
    return mask


def _ball_mask(center: int, r: int, n: int) -> int:
    mask = 0
    for flips in range(r + 1):
        for S in itertools.combinations(range(n), flips):
            mask |= 1 << sum(1 << k for k in S)
    return _xor_translate(mask, center, n)


def greedy_covering_code(n: int, r: int) -> CoveringCode:
    """Greedy set cover over radius-r balls; ties to the smaller codeword."""
    if r > n:
        raise RejectedInput("radius exceeds the length")
    if n > 16:
        raise CapacityError("greedy cover beyond the exhaustive limit")
    base = _ball_mask(0, r, n)
    balls = [_xor_translate(base, c, n) for c in range(1 << n)]
    uncovered = (1 << (1 << n)) - 1
    words = []
    while uncovered:
        best, best_gain = 0, -1
        for c in range(1 << n):
            gain = (balls[c] & uncovered).bit_count()
            if gain > best_gain:
                best, best_gain = c, gain
        words.append(best)
        uncovered &= ~balls[best]
    return CoveringCode(n, r, tuple(words))


def covering_bound(n: int, r: int) -> float:
    """The existence bound n * 2^n / C(n, <= r) the greedy output is logged against."""
    from math import comb

    return n * 2 ** n / sum(comb(n, i) for i in range(r + 1))


def sphere_dnf(g: TruthTable, codeword: int, j: int) -> Dnf:
    """Unate DNF agreeing with g on the radius-j sphere around the codeword.

    Variables where the codeword is 1 appear negated, so relative to the
    codeword every term tests 'flipped exactly here'.
    """
    n = g.arity
    terms = []
    for S in itertools.combinations(range(n), j):
        flip = sum(1 << k for k in S)
        if not g.value(codeword ^ flip):
            continue
        pos = frozenset(k for k in S if not (codeword >> k) & 1)
        neg = frozenset(k for k in S if (codeword >> k) & 1)
        terms.append((pos, neg))
    return Dnf(n, tuple(terms))


def covering_code_protocol_or(g: TruthTable, code: CoveringCode) -> BsmProtocol:
    """Protocol for g(x | y) built from per-sphere unate sub-protocols.

    Carol reconstructs z = x | y from the raw input blocks, computes the
    Hamming distance to every codeword with adder trees, selects the
    nearest (lowest index on ties), and outputs that sphere's block value.
    """
    n = g.arity
    if code.length != n:
        raise RejectedInput("code length must match the function arity")
    spheres = []
    for i, c in enumerate(code.codewords):
        for j in range(code.radius + 1):
            dnf = sphere_dnf(g, c, j)
            spheres.append(((i, j), dnf, _or_block_index(dnf)))

    seg_lengths = [2 * len(index) for (_, _, index) in spheres]
    total = sum(seg_lengths) + n

    def message(x):
        bits = []
        for _, dnf, index in spheres:
            bits.extend(_or_block_messages(dnf, index, x))
        bits.extend((x >> k) & 1 for k in range(n))
        return Message(2, tuple(bits))

    msgs = tuple(message(x) for x in range(1 << n))

    builder = CircuitBuilder(total, total)
    raw = total - n
    z_bits = [builder.bor(builder.alice(raw + k), builder.bob(raw + k))
              for k in range(n)]
    dist = []
    for c in code.codewords:
        diff = [builder.bnot(z_bits[k]) if (c >> k) & 1 else z_bits[k]
                for k in range(n)]
        dist.append(builder.popcount(diff))
    nearest = []
    for i in range(code.size):
        conds = []
        for i2 in range(code.size):
            if i2 < i:
                conds.append(builder.less_than(dist[i], dist[i2]))
            elif i2 > i:
                conds.append(builder.bnot(builder.less_than(dist[i2], dist[i])))
        nearest.append(builder.reduce_and(conds))

    picks = []
    offset = 0
    for (i, j), dnf, index in spheres:
        block = _or_block_wire(builder, len(index), offset, offset)
        sel = builder.band(nearest[i], builder.equals_const(dist[i], j))
        picks.append(builder.band(sel, block))
        offset += 2 * len(index)
    out = builder.reduce_or(picks)
    return BsmProtocol(n, msgs, msgs, builder.build(out),
                       label=f"cover_or_m{code.size}_r{code.radius}")


# ---------------------------------------------------------------------------
# AND combiner through the OR machinery


def and_protocol_via_or(g: TruthTable,
                        or_builder: Callable[[TruthTable], BsmProtocol]) -> BsmProtocol:
    """Protocol for g(x & y) by dualizing: g(x & y) = !gd((!x) | (!y))
    with gd(z) = !g(!z)."""
    n = g.arity
    mask = (1 << n) - 1
    dual = TruthTable.from_values([1 - g.value(mask ^ z) for z in range(1 << n)])
    sub = or_builder(dual)
    alice = tuple(sub.alice_map[mask ^ x] for x in range(1 << n))
    bob = tuple(sub.bob_map[mask ^ y] for y in range(1 << n))
    carol = sub.carol
    if not isinstance(carol, CircuitCarol):
        raise RejectedInput("dualization wrapper needs a circuit Carol")
    gates = list(carol.gates) + [(NOT, carol.output)]
    wrapped = CircuitCarol(carol.na, carol.nb, gates,
                           carol.na + carol.nb + len(gates) - 1)
    return BsmProtocol(n, alice, bob, wrapped, label=f"and_via_{sub.label}")


# ---------------------------------------------------------------------------
# protocols back to plain circuits


@dataclass
class DerivedEvaluator:
    """A standalone evaluator for g obtained from a protocol for g(x ^ y)."""

    arity: int
    protocol: BsmProtocol
    table_entries: int
    total_size: int

    def __call__(self, z: int) -> int:
        half = self.arity // 2
        lo = z & ((1 << half) - 1)
        hi = z >> half
        return self.protocol.carol.evaluate(
            self.protocol.alice_map[lo], self.protocol.bob_map[hi << half])


def bsm_to_circuit(protocol: BsmProtocol, g: TruthTable) -> DerivedEvaluator:
    """Hardwire half of each input to zero: g(zL, zR) = Carol(A(zL||0), B(0||zR)).

    The reported size charges both hardwired message tables (entries times
    message length) plus Carol.
    """
    n = g.arity
    if n % 2:
        raise RejectedInput("evaluator derivation needs even n; pad the input")
    if protocol.input_arity != n:
        raise RejectedInput("protocol arity must equal the function arity")
    target = tabulate_pair(g, lambda x, y: x ^ y)
    report = verify_exhaustive(protocol, target)
    if not report.ok:
        raise VerificationMismatch(
            f"protocol does not compute g(x^y): {len(report.mismatches)} mismatches")
    meas = measure(protocol)
    half_entries = 1 << (n // 2)
    size = 2 * half_entries * max(meas.alice_length, meas.bob_length) \
        + meas.cost.gate_count
    return DerivedEvaluator(arity=n, protocol=protocol,
                            table_entries=2 * half_entries, total_size=size)


def xor_lookup_protocol(g: TruthTable) -> BsmProtocol:
    """Baseline: verbatim forwarding with a lookup Carol for g(x ^ y)."""
    n = g.arity
    N = 1 << n
    msgs = tuple(Message(2, tuple((x >> i) & 1 for i in range(n))) for x in range(N))
    table = {(msgs[x].symbols, msgs[y].symbols): g.value(x ^ y)
             for x in range(N) for y in range(N)}
    return BsmProtocol(n, msgs, msgs, LookupCarol(table), label="xor_lookup")
