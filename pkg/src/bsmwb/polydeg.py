"""Degree-bounded polynomial Carols over F2 and Z6.

Three constructions live here:

* the universal degree-reduction protocol: each party groups its n input
  bits into ceil(n/t) blocks of at most t coordinates and sends the product
  of every nonempty subset inside each block, after which Carol evaluates
  the unique multilinear mod-2 polynomial of the target rewritten over
  those block products (one factor per touched block);

* an exhaustive search for protocols whose Carol is a bilinear-plus-affine
  mod-2 form P(z, w) = sum c_ij z_i w_j + sum d_i z_i + sum e_j w_j + r.
  For fixed Alice/Bob maps, such a form exists iff a linear system over F2
  is consistent, so the scan solves one small system per map pair instead
  of enumerating coefficient vectors; the outcome is either the first
  (lexicographically least) witness protocol or an exhaustion certificate;

* the degree-2 equality protocol over Z6: Alice and Bob map inputs into a
  matching vector family, Carol computes the inner product mod 6 and then
  applies the zero-test predicate, which equals q(c)^3 + 1 in F4 under
  q(c) = (c mod 2, c mod 3).

A note on the degree-reduction degree bound: with blocks confined to one
party (a block crossing the Alice/Bob boundary would be computable by
neither), the worst-case Carol degree is 2*ceil(n/t).  This equals
ceil(2n/t) whenever t divides n but exceeds it otherwise, e.g. n=4, t=3
gives degree 4 > ceil(8/3) = 3, and no boundary-respecting blocking can do
better because a monomial spanning all 2n variables needs at least
ceil(n/t) factors per half.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (BsmProtocol, Message, PolynomialCarol, TruthTable, measure,
                   verify_exhaustive)
from .errors import CapacityError, MalformedProtocol, RejectedInput


@dataclass(frozen=True)
class ModularPolynomial:
    """Polynomial over Z_m; monomials map sorted variable tuples to coefficients.

    Tuples may repeat variables for m > 2; everything built from truth
    tables is multilinear.  Coefficients are stored reduced and nonzero.
    """

    modulus: int
    variable_count: int
    monomials: dict

    def __post_init__(self):
        clean = {}
        for mono, coeff in self.monomials.items():
            mono = tuple(sorted(mono))
            if any(not 0 <= v < self.variable_count for v in mono):
                raise RejectedInput("monomial variable out of range")
            c = coeff % self.modulus
            if c:
                clean[mono] = c
        object.__setattr__(self, "monomials", clean)

    def degree(self) -> int:
        return max((len(m) for m in self.monomials), default=0)

    def evaluate(self, assignment) -> int:
        total = 0
        for mono, coeff in self.monomials.items():
            term = coeff
            for v in mono:
                term = (term * assignment[v]) % self.modulus
            total = (total + term) % self.modulus
        return total


def mobius_f2(table: TruthTable, limit: int = 24) -> ModularPolynomial:
    """The unique multilinear F2 polynomial agreeing with the table."""
    if table.arity > limit:
        raise CapacityError("mobius transform beyond the exhaustive limit")
    k = table.arity
    coeffs = [table.value(i) for i in range(1 << k)]
    for b in range(k):
        step = 1 << b
        for i in range(1 << k):
            if i & step:
                coeffs[i] ^= coeffs[i ^ step]
    monos = {}
    for s in range(1 << k):
        if coeffs[s]:
            monos[tuple(i for i in range(k) if (s >> i) & 1)] = 1
    return ModularPolynomial(2, k, monos)


# ---------------------------------------------------------------------------
# universal degree reduction


def _blocks(coords, t):
    return [coords[i:i + t] for i in range(0, len(coords), t)]


def t_for_budget(n: int, m: int) -> int:
    """Block size achieving message budget m per party (n < m < 2^n)."""
    if not n < m:
        raise RejectedInput("budget must exceed n")
    return max(1, math.ceil(math.log2(m / (4 * n))))


def degree_reduce_protocol(f: TruthTable, t: int) -> BsmProtocol:
    """Block-product protocol for an arbitrary f on 2n bits.

    Per party: ceil(n/t) blocks of <= t coordinates, one message bit for
    every nonempty subset of each block.  Carol rewrites each multilinear
    monomial of f as the product of its per-block pieces.
    """
    if f.arity % 2:
        raise RejectedInput("degree reduction needs a function on 2n bits")
    n = f.arity // 2
    if not 1 <= t <= n:
        raise RejectedInput(f"block size t={t} out of range [1, {n}]")

    half_blocks = _blocks(list(range(n)), t)
    # subset catalog per party: (block coords, subset mask) in a fixed order
    catalog = []
    for block in half_blocks:
        for mask in range(1, 1 << len(block)):
            catalog.append(tuple(block[i] for i in range(len(block)) if (mask >> i) & 1))
    index_of = {subset: i for i, subset in enumerate(catalog)}
    mlen = len(catalog)

    def party_messages():
        out = []
        for x in range(1 << n):
            out.append(Message(2, tuple(
                1 if all((x >> v) & 1 for v in subset) else 0 for subset in catalog)))
        return tuple(out)

    msgs = party_messages()

    poly_f = mobius_f2(f)
    rewritten = {}
    for mono in poly_f.monomials:
        pieces = []
        for side, offset in ((0, 0), (1, n)):
            part = [v - offset for v in mono if offset <= v < offset + n]
            for block in half_blocks:
                piece = tuple(v for v in block if v in part)
                if piece:
                    pieces.append(index_of[piece] + side * mlen)
        rewritten[tuple(sorted(pieces))] = rewritten.get(tuple(sorted(pieces)), 0) ^ 1

    carol = PolynomialCarol(
        ModularPolynomial(2, 2 * mlen, {m: c for m, c in rewritten.items() if c}),
        (0, 1), mlen, mlen)
    return BsmProtocol(n, msgs, msgs, carol, label=f"degree_reduce_t{t}")


# ---------------------------------------------------------------------------
# bilinear-plus-affine search


@dataclass(frozen=True)
class Idg1Form:
    """Bilinear-plus-affine form over F2 for message lengths (ma, mb)."""

    ma: int
    mb: int
    c: tuple  # ma*mb row-major bilinear coefficients
    d: tuple
    e: tuple
    r: int

    def evaluate(self, z, w) -> int:
        acc = self.r
        for i in range(self.ma):
            if z[i]:
                acc ^= self.d[i]
                for j in range(self.mb):
                    acc ^= self.c[i * self.mb + j] & w[j]
        for j in range(self.mb):
            acc ^= self.e[j] & w[j]
        return acc

    def to_polynomial(self) -> ModularPolynomial:
        monos = {}
        for i in range(self.ma):
            for j in range(self.mb):
                if self.c[i * self.mb + j]:
                    monos[(i, self.ma + j)] = 1
        for i in range(self.ma):
            if self.d[i]:
                monos[(i,)] = 1
        for j in range(self.mb):
            if self.e[j]:
                monos[(self.ma + j,)] = 1
        if self.r:
            monos[()] = 1
        return ModularPolynomial(2, self.ma + self.mb, monos)


@dataclass
class SearchOutcome:
    """Either a witness protocol or a certificate that none exists."""

    found: bool
    protocol: Optional[BsmProtocol] = None
    form: Optional[Idg1Form] = None
    alice_codes: Optional[tuple] = None
    bob_codes: Optional[tuple] = None
    pairs_scanned: int = 0


def _batch_solvable(mats: np.ndarray, nunk: int) -> np.ndarray:
    """Consistency of many F2 systems at once.

    mats[b, e] packs equation e of system b: bit u (u < nunk) is the
    coefficient of unknown u, bit nunk is the right-hand side.
    """
    mats = mats.copy()
    nsys, neq = mats.shape
    rank = np.zeros(nsys, dtype=np.int64)
    eq_index = np.arange(neq)[None, :]
    for col in range(nunk):
        bits = ((mats >> col) & 1).astype(bool)
        avail = bits & (eq_index >= rank[:, None])
        has = avail.any(axis=1)
        rows = np.flatnonzero(has)
        if rows.size == 0:
            continue
        piv = avail[rows].argmax(axis=1)
        at = rank[rows]
        swap = mats[rows, at].copy()
        mats[rows, at] = mats[rows, piv]
        mats[rows, piv] = swap
        pivrow = np.zeros(nsys, dtype=mats.dtype)
        pivrow[rows] = mats[rows, at]
        victims = ((mats >> col) & 1).astype(bool)
        victims[rows, at] = False
        victims[~has] = False
        mats ^= (victims * pivrow[:, None]).astype(mats.dtype)
        rank[rows] = at + 1
    return ~(mats == np.array(1 << nunk, dtype=mats.dtype)).any(axis=1)


def _solve_f2(rows: list, nunk: int) -> Optional[list]:
    """One F2 system, rows packed as ints with bit nunk = RHS.

    Returns the reduced-echelon solution with free variables set to 0.
    """
    rows = [r for r in rows]
    pivots = {}
    for col in range(nunk):
        pivot = None
        for r in rows:
            if (r >> col) & 1 and all((r >> c) & 1 == 0 for c in pivots):
                pivot = r
                break
        if pivot is None:
            continue
        rows = [r ^ pivot if r is not pivot and (r >> col) & 1 else r for r in rows]
        pivots[col] = pivot
    if any(r == 1 << nunk for r in rows):
        return None
    sol = [0] * nunk
    for col, r in pivots.items():
        sol[col] = (r >> nunk) & 1
    # back-substitute: pivot rows may still reference later free columns (all 0)
    for col, r in sorted(pivots.items(), reverse=True):
        v = (r >> nunk) & 1
        for c2 in range(col + 1, nunk):
            if (r >> c2) & 1:
                v ^= sol[c2]
        sol[col] = v
    return sol


def _feature_patterns(m: int):
    """Row pattern per (alice symbol word, bob symbol word)."""
    nunk = m * m + 2 * m + 1
    dtype = np.uint32 if nunk < 31 else np.uint64
    pat = np.zeros((1 << m, 1 << m), dtype=dtype)
    for av in range(1 << m):
        for bv in range(1 << m):
            row = 1 << (m * m + 2 * m)
            for i in range(m):
                if (av >> i) & 1:
                    row |= 1 << (m * m + i)
                    for j in range(m):
                        if (bv >> j) & 1:
                            row |= 1 << (i * m + j)
            for j in range(m):
                if (bv >> j) & 1:
                    row |= 1 << (m * m + m + j)
            pat[av, bv] = row
    return pat, nunk, dtype


def search_idg1_protocol(f: TruthTable, m: int,
                         budget: int = 1 << 44,
                         bob_scan_reversed: bool = False) -> SearchOutcome:
    """Exhaust all Alice/Bob maps of message length m for a bilinear Carol.

    Alice maps are scanned in lexicographic order of the message-word
    tuple (A(0), ..., A(2^n - 1)); for each, every Bob map is tested by
    solving the per-pair linear system.  The witness is therefore the
    lexicographically least solvable pair, with form coefficients from the
    deterministic echelon solution.
    """
    if f.arity % 2:
        raise RejectedInput("search needs a function on 2n bits")
    n = f.arity // 2
    nx = 1 << n
    space = (2 ** m) ** (2 * nx) * 2 ** (m * m + 2 * m + 1)
    if space > budget:
        raise CapacityError(f"search space 2^{space.bit_length()-1} exceeds budget")

    pat, nunk, dtype = _feature_patterns(m)
    pairs = [(x, y) for x in range(nx) for y in range(nx)]
    xidx = np.array([p[0] for p in pairs])
    yidx = np.array([p[1] for p in pairs])
    rhs = np.array([f.value(p[0] + nx * p[1]) for p in pairs], dtype=dtype) << nunk

    bobs = np.array(list(itertools.product(range(1 << m), repeat=nx)), dtype=np.int64)
    if bob_scan_reversed:
        bobs = bobs[::-1].copy()
    scanned = 0
    for alice in itertools.product(range(1 << m), repeat=nx):
        a_arr = np.array(alice)
        mats = pat[a_arr[xidx][None, :], bobs[:, yidx]] | rhs[None, :]
        ok = _batch_solvable(mats, nunk)
        scanned += len(bobs)
        if not ok.any():
            continue
        hits = np.flatnonzero(ok)
        order = np.lexsort(bobs[hits].T[::-1])
        bob = tuple(int(v) for v in bobs[hits[order[0]]])
        rows = [int(pat[alice[x], bob[y]]) | (f.value(x + nx * y) << nunk)
                for x in range(nx) for y in range(nx)]
        sol = _solve_f2(rows, nunk)
        assert sol is not None
        form = Idg1Form(
            ma=m, mb=m,
            c=tuple(sol[:m * m]),
            d=tuple(sol[m * m:m * m + m]),
            e=tuple(sol[m * m + m:m * m + 2 * m]),
            r=sol[m * m + 2 * m])
        msgs_a = tuple(Message(2, tuple((alice[x] >> i) & 1 for i in range(m)))
                       for x in range(nx))
        msgs_b = tuple(Message(2, tuple((bob[y] >> i) & 1 for i in range(m)))
                       for y in range(nx))
        carol = PolynomialCarol(form.to_polynomial(), (0, 1), m, m)
        protocol = BsmProtocol(n, msgs_a, msgs_b, carol, label=f"idg1_m{m}")
        if not verify_exhaustive(protocol, f).ok:
            raise MalformedProtocol("solved form fails exhaustive verification")
        return SearchOutcome(True, protocol, form, alice, bob, scanned)
    return SearchOutcome(False, pairs_scanned=scanned)


@dataclass
class DegreeBoundReport:
    n: int
    m: int
    degree: int
    bound: float
    holds: bool


def check_degree_bounds(protocol: BsmProtocol) -> DegreeBoundReport:
    """Measured Carol degree against the n / log2(m+1) floor for equality."""
    if not isinstance(protocol.carol, PolynomialCarol) or protocol.carol.poly.modulus != 2:
        raise RejectedInput("degree bound check needs an F2-polynomial Carol")
    meas = measure(protocol)
    m = max(meas.alice_length, meas.bob_length)
    n = protocol.input_arity
    bound = n / math.log2(m + 1)
    degree = meas.cost.degree
    return DegreeBoundReport(n=n, m=m, degree=degree, bound=bound,
                             holds=degree + 1e-12 >= bound)


# ---------------------------------------------------------------------------
# matching vector families over Z6


MV_OFFDIAG = (1, 3, 4)


@dataclass(frozen=True)
class MvFamily:
    """Vectors u_i, v_i over Z6^k with zero diagonal inner products and
    off-diagonal inner products inside {1, 3, 4}."""

    dimension: int
    u_vectors: tuple
    v_vectors: tuple
    s_set: tuple = MV_OFFDIAG

    def __post_init__(self):
        if len(self.u_vectors) != len(self.v_vectors):
            raise RejectedInput("u/v lists must have equal size")
        for vecs in (self.u_vectors, self.v_vectors):
            for v in vecs:
                if len(v) != self.dimension or any(not 0 <= c < 6 for c in v):
                    raise RejectedInput("vectors must lie in Z6^k")
        for i, u in enumerate(self.u_vectors):
            for j, v in enumerate(self.v_vectors):
                ip = sum(a * b for a, b in zip(u, v)) % 6
                if i == j and ip != 0:
                    raise RejectedInput(f"diagonal inner product ({i}) is {ip} != 0")
                if i != j and ip not in self.s_set:
                    raise RejectedInput(f"off-diagonal inner product ({i},{j}) = {ip} not in S")

    @property
    def size(self):
        return len(self.u_vectors)


def find_mv_family(target_size: int, k: int,
                   node_budget: int = 2_000_000) -> Optional[MvFamily]:
    """Backtracking search for a family of `target_size` pairs in Z6^k.

    All u_i in a family are necessarily distinct (u_i = u_j would force the
    off-diagonal product <u_i, v_j> to equal the diagonal zero), so pairs
    are placed with strictly increasing u in lexicographic vector order;
    candidate filters over the full 6^k vector list implement one-step
    forward checking.  Returns None when the space is exhausted; raises
    when the node budget would be exceeded.
    """
    if k < 1 or target_size < 1:
        raise RejectedInput("need k >= 1 and size >= 1")
    if 6 ** (2 * k) > 1 << 46 or k > 9:
        raise CapacityError(f"6^(2k) search nodes at k={k} exceed the budget")
    vecs = np.array(list(itertools.product(range(6), repeat=k)), dtype=np.int64)
    nv = len(vecs)
    in_s = np.zeros(6, dtype=bool)
    for s in MV_OFFDIAG:
        in_s[s] = True
    nodes = 0

    def rec(pairs, u_ok, v_ok, u_from):
        nonlocal nodes
        if len(pairs) == target_size:
            return pairs
        remaining = target_size - len(pairs)
        if int(u_ok[u_from:].sum()) < remaining or int(v_ok.sum()) < remaining:
            return None
        for iu in np.flatnonzero(u_ok[u_from:]) + u_from:
            nodes += 1
            if nodes > node_budget:
                raise CapacityError(f"matching-vector search exceeded {node_budget} nodes")
            dots = (vecs @ vecs[iu]) % 6
            v_here = v_ok & (dots == 0)
            if not v_here.any():
                continue
            v_next = v_ok & in_s[dots]
            if int(v_next.sum()) < remaining - 1:
                continue
            for iv in np.flatnonzero(v_here):
                dots_v = (vecs @ vecs[iv]) % 6
                u_next = u_ok & in_s[dots_v]
                got = rec(pairs + [(iu, iv)], u_next, v_next, int(iu) + 1)
                if got is not None:
                    return got
        return None

    found = rec([], np.ones(nv, dtype=bool), np.ones(nv, dtype=bool), 0)
    if found is None:
        return None
    return MvFamily(
        dimension=k,
        u_vectors=tuple(tuple(int(c) for c in vecs[iu]) for iu, _ in found),
        v_vectors=tuple(tuple(int(c) for c in vecs[iv]) for _, iv in found))


# ---------------------------------------------------------------------------
# the zero-test predicate over Z6, through F4

# F4 = F2[w]/(w^2+w+1), elements encoded 0,1,2,3 = 0, 1, w, w+1.
_F4_MUL = (
    (0, 0, 0, 0),
    (0, 1, 2, 3),
    (0, 2, 3, 1),
    (0, 3, 1, 2),
)


def f4_mul(a: int, b: int) -> int:
    return _F4_MUL[a][b]


def f4_add(a: int, b: int) -> int:
    return a ^ b


def q6_to_f4(c: int) -> int:
    """Embed Z6 via chinese remainders: (c mod 2, c mod 3) with the mod-3
    residue sent multiplicatively to {0, w, w^2}.  Zero only at c = 0."""
    r3 = c % 3
    m3 = (0, 2, 3)[r3]  # 0, w, w^2
    return f4_add(c % 2, m3)


def zero_test_via_f4(c: int) -> int:
    """[c == 0 in Z6] computed as q(c)^3 + 1 inside F4."""
    q = q6_to_f4(c)
    cube = f4_mul(f4_mul(q, q), q)
    return f4_add(cube, 1)


def mv_equality_protocol(family: MvFamily) -> BsmProtocol:
    """Equality on n bits via a matching vector family of size 2^n.

    Carol computes the inner product mod 6 (degree 2) and then the
    zero-test predicate.
    """
    size = family.size
    n = (size).bit_length() - 1
    if size != 1 << n:
        raise RejectedInput("family size must be a power of two")
    k = family.dimension
    msgs_a = tuple(Message(6, family.u_vectors[x]) for x in range(size))
    msgs_b = tuple(Message(6, family.v_vectors[y]) for y in range(size))
    poly = ModularPolynomial(6, 2 * k, {(i, k + i): 1 for i in range(k)})
    predicate = tuple(zero_test_via_f4(c) for c in range(6))
    carol = PolynomialCarol(poly, predicate, k, k)
    return BsmProtocol(n, msgs_a, msgs_b, carol, label=f"mv_eq_{n}")


def equality_table(n: int) -> TruthTable:
    N = 1 << n
    bits = 0
    for x in range(N):
        bits |= 1 << (x + N * x)
    return TruthTable(2 * n, bits)
