"""Randomized split encodings of SAT, 3-coloring, and integer partition.

Each reduction maps one instance into an (alice_part, bob_part) pair such
that the combined instance has the same answer, while the distribution of
each part alone depends only on the instance size.  Exact deciders for
both the source and the split problems live here too, so equivalence can
be machine-checked instance by instance, plus statistical checkers for the
privacy property.

Construction summary:

* SAT: with C_1..C_N the full list of clauses of width <= 3 over n
  variables and pi a uniform permutation of [2N], the alice part is
  AND_i (C_i or y_pi(i)) and the bob part forces y_pi(i) false for i in
  I u J, where I holds the indices of clauses present in the input and
  J = N + the indices of absent clauses.  The alice part depends only on
  pi; the bob part's marginal is a uniform N-subset image.

* 3COL: per vertex pair (v < v') with j = pi(pair), the alice part hangs
  two triangle gadgets (a_j, b_j, c_j) and (a'_j, b'_j, c'_j) off v and
  v'; the bob part is the matching {(c_j, c'_j)} at j = pi(e) for present
  edges and j = pi(N + e) for absent ones.

* PARTITION: with p = n*2^n + 1 and x_i = y_i + z_i mod p for uniform
  y_i, the parts carry Y_i = y_i*8^n + 8^i, Z_i = z_i*8^n + 2*8^i,
  W_i = 3*8^i, plus balancing elements p*8^n/2 (twice) and
  2^j * p*8^n / 2 for j = 1..ceil(log2 n).  The duplicated half element
  matters: it makes every integer imbalance k * p*8^n with |k| <= n
  reachable by a full split of the balancing set, including k = 0, while
  keeping all balancing elements congruent to 0 mod p*8^n in pairwise
  sums.  A balancing set of plain powers {2^j * p*8^n} can only realize
  odd k and sends exactly-balanced instances to "no".
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Optional

from .errors import CapacityError, RejectedInput
from .rng import child_seed, fisher_yates, make_rng

SAT_VAR_LIMIT = 12
DECIDER_NODE_LIMIT = 2_000_000


# ---------------------------------------------------------------------------
# instance types


@dataclass(frozen=True)
class Cnf:
    variable_count: int
    clauses: tuple  # of frozensets of nonzero signed ints

    def __post_init__(self):
        norm = []
        for clause in self.clauses:
            clause = frozenset(clause)
            for lit in clause:
                if lit == 0 or abs(lit) > self.variable_count:
                    raise RejectedInput(f"literal {lit} out of range")
                if -lit in clause:
                    raise RejectedInput("clause contains a variable and its negation")
            norm.append(clause)
        object.__setattr__(self, "clauses", tuple(norm))

    def width(self) -> int:
        return max((len(c) for c in self.clauses), default=0)


@dataclass(frozen=True)
class Graph:
    vertex_labels: frozenset
    edges: frozenset  # of frozensets {u, v}

    def __post_init__(self):
        for e in self.edges:
            if len(e) != 2:
                raise RejectedInput("self-loop or malformed edge")
            if not e <= self.vertex_labels:
                raise RejectedInput("edge endpoint outside the vertex set")

    @staticmethod
    def from_edge_list(n: int, pairs) -> "Graph":
        return Graph(frozenset(range(1, n + 1)),
                     frozenset(frozenset(p) for p in pairs))


@dataclass(frozen=True)
class IntMultiset:
    elements: tuple

    def __post_init__(self):
        if any(e < 0 for e in self.elements):
            raise RejectedInput("elements must be non-negative")
        object.__setattr__(self, "elements", tuple(self.elements))


@dataclass(frozen=True)
class ReductionOutput:
    kind: str
    alice_part: object
    bob_part: object
    seed: int
    fingerprint: tuple


# ---------------------------------------------------------------------------
# exact deciders


def decide_sat(cnf: Cnf, node_limit: int = DECIDER_NODE_LIMIT) -> int:
    """DPLL with unit propagation; exact, or CapacityError past the budget."""
    nodes = 0

    def propagate(clauses, assign):
        changed = True
        while changed:
            changed = False
            new = []
            for clause in clauses:
                live = []
                satisfied = False
                for lit in clause:
                    v = assign.get(abs(lit))
                    if v is None:
                        live.append(lit)
                    elif (v == 1) == (lit > 0):
                        satisfied = True
                        break
                if satisfied:
                    continue
                if not live:
                    return None
                if len(live) == 1:
                    lit = live[0]
                    assign[abs(lit)] = 1 if lit > 0 else 0
                    changed = True
                else:
                    new.append(live)
            clauses = new
        return clauses

    def rec(clauses, assign):
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise CapacityError("SAT search ran past its node limit")
        clauses = propagate(clauses, assign)
        if clauses is None:
            return 0
        if not clauses:
            return 1
        var = abs(clauses[0][0])
        for value in (1, 0):
            trial = dict(assign)
            trial[var] = value
            if rec([list(c) for c in clauses], trial):
                return 1
        return 0

    if any(len(c) == 0 for c in cnf.clauses):
        return 0
    return rec([list(c) for c in cnf.clauses], {})


def decide_3col(graph: Graph, node_limit: int = DECIDER_NODE_LIMIT) -> int:
    """Backtracking 3-coloring with forced-move (most-constrained) ordering."""
    vertices = sorted(graph.vertex_labels, key=str)
    adj = {v: set() for v in vertices}
    for e in graph.edges:
        u, v = tuple(e)
        adj[u].add(v)
        adj[v].add(u)
    color = {}
    nodes = 0

    def pick():
        best, best_key = None, None
        for v in vertices:
            if v in color:
                continue
            used = {color[u] for u in adj[v] if u in color}
            if len(used) == 3:
                return v, used
            key = (-len(used), -len(adj[v]))
            if best is None or key < best_key:
                best, best_key = v, key
        if best is None:
            return None, None
        return best, {color[u] for u in adj[best] if u in color}

    def rec():
        nonlocal nodes
        nodes += 1
        if nodes > node_limit:
            raise CapacityError("coloring search ran past its node limit")
        v, used = pick()
        if v is None:
            return 1
        for c in range(3):
            if c in used:
                continue
            color[v] = c
            if rec():
                return 1
            del color[v]
        return 0

    return rec()


def decide_partition(ms: IntMultiset) -> int:
    """Equal-sum split decision by meet-in-the-middle subset sums."""
    vals = list(ms.elements)
    total = sum(vals)
    if total % 2:
        return 0
    half = total // 2
    if len(vals) > 40:
        raise CapacityError("partition instance too large for enumeration")
    mid = len(vals) // 2
    left, right = vals[:mid], vals[mid:]
    left_sums = set()
    for mask in range(1 << len(left)):
        s = 0
        for i, v in enumerate(left):
            if (mask >> i) & 1:
                s += v
        left_sums.add(s)
    for mask in range(1 << len(right)):
        s = 0
        for i, v in enumerate(right):
            if (mask >> i) & 1:
                s += v
        if half - s in left_sums:
            return 1
    return 0


# ---------------------------------------------------------------------------
# SAT -> split SAT


def enumerate_clauses(n: int) -> list:
    """Every clause of width 1..3 over variables 1..n.

    Ordered by sorted variable tuple, then sign pattern (bit i of the
    pattern negates the i-th variable of the tuple).  The count is
    2n + 4*C(n,2) + 8*C(n,3).
    """
    clauses = []
    tuples = []
    for w in (1, 2, 3):
        if n >= w:
            from itertools import combinations
            tuples.extend(combinations(range(1, n + 1), w))
    tuples.sort()
    for vs in tuples:
        for pattern in range(1 << len(vs)):
            clauses.append(frozenset(
                -v if (pattern >> i) & 1 else v for i, v in enumerate(vs)))
    return clauses


def reduce_sat(phi: Cnf, seed: int, var_limit: int = SAT_VAR_LIMIT) -> ReductionOutput:
    """Split encoding of a 3-CNF; alice part depends only on the permutation."""
    if phi.width() > 3:
        raise RejectedInput("input clauses must have width <= 3")
    n = phi.variable_count
    if n > var_limit:
        raise CapacityError(f"n={n} beyond the clause-enumeration limit")
    clause_list = enumerate_clauses(n)
    big_n = len(clause_list)
    index = {c: i for i, c in enumerate(clause_list)}
    present = set()
    for c in phi.clauses:
        if len(c) == 0:
            raise RejectedInput("empty clause in input")
        present.add(index[c])
    pi = fisher_yates(2 * big_n, make_rng(seed))

    def y_var(j):
        return n + 1 + j  # auxiliary variables n+1 .. n+2N

    alpha = Cnf(n + 2 * big_n, tuple(
        clause_list[i] | {y_var(pi[i])} for i in range(big_n)))
    chosen = sorted(
        [i for i in range(big_n) if i in present]
        + [big_n + i for i in range(big_n) if i not in present])
    beta = Cnf(n + 2 * big_n, tuple(frozenset({-y_var(pi[i])}) for i in chosen))
    fingerprint = tuple(sorted(pi[i] for i in chosen))
    return ReductionOutput("sat", alpha, beta, seed, fingerprint)


def conjoin(a: Cnf, b: Cnf) -> Cnf:
    return Cnf(max(a.variable_count, b.variable_count), a.clauses + b.clauses)


# ---------------------------------------------------------------------------
# 3COL -> split 3COL


def _pair_index(n: int):
    pairs = [(v, w) for v in range(1, n + 1) for w in range(v + 1, n + 1)]
    return pairs, {p: i for i, p in enumerate(pairs)}


def reduce_3col(graph: Graph, seed: int) -> ReductionOutput:
    if not all(isinstance(v, int) for v in graph.vertex_labels):
        raise RejectedInput("vertices must be integers 1..n")
    n = max(graph.vertex_labels) if graph.vertex_labels else 0
    if graph.vertex_labels != frozenset(range(1, n + 1)):
        raise RejectedInput("vertices must be exactly 1..n")
    pairs, pidx = _pair_index(n)
    big_n = len(pairs)
    pi = fisher_yates(2 * big_n, make_rng(seed))

    def gadget(tag, j):
        return f"{tag}{j}"

    labels = set(range(1, n + 1))
    for j in range(2 * big_n):
        for tag in ("a", "b", "c", "a'", "b'", "c'"):
            labels.add(gadget(tag, j))

    a_edges = set()
    for (v, w) in pairs:
        j = pi[pidx[(v, w)]]
        a_edges |= {
            frozenset({v, gadget("a", j)}), frozenset({v, gadget("b", j)}),
            frozenset({w, gadget("a'", j)}), frozenset({w, gadget("b'", j)}),
            frozenset({gadget("a", j), gadget("b", j)}),
            frozenset({gadget("b", j), gadget("c", j)}),
            frozenset({gadget("a", j), gadget("c", j)}),
            frozenset({gadget("a'", j), gadget("b'", j)}),
            frozenset({gadget("b'", j), gadget("c'", j)}),
            frozenset({gadget("a'", j), gadget("c'", j)}),
        }

    matched = []
    for (v, w) in pairs:
        p = pidx[(v, w)]
        e = frozenset({v, w})
        j = pi[p] if e in graph.edges else pi[big_n + p]
        matched.append(j)
    b_edges = {frozenset({gadget("c", j), gadget("c'", j)}) for j in matched}

    labels = frozenset(labels)
    return ReductionOutput(
        "3col",
        Graph(labels, frozenset(a_edges)),
        Graph(labels, frozenset(b_edges)),
        seed,
        tuple(sorted(matched)))


def union_graph(a: Graph, b: Graph) -> Graph:
    return Graph(a.vertex_labels | b.vertex_labels, a.edges | b.edges)


# ---------------------------------------------------------------------------
# PARTITION -> split PARTITION


def partition_modulus(n: int) -> int:
    return n * (1 << n) + 1


def _balancing_elements(n: int) -> list:
    p = partition_modulus(n)
    half = p * 8 ** n // 2
    m = max(0, math.ceil(math.log2(n))) if n > 1 else 0
    return [half] + [half << j for j in range(m + 1)]


def reduce_partition(ms: IntMultiset, seed: int) -> ReductionOutput:
    n = len(ms.elements)
    if n < 1:
        raise RejectedInput("need at least one element (pad with zeros)")
    if any(x >= 1 << n for x in ms.elements):
        raise RejectedInput(f"elements must be < 2^{n}; pad n upward instead")
    p = partition_modulus(n)
    rng = make_rng(seed)
    ys = [rng.randrange(p) for _ in range(n)]
    zs = [(x - y) % p for x, y in zip(ms.elements, ys)]
    scale = 8 ** n
    alice = [y * scale + 8 ** i for i, y in enumerate(ys)]
    bob = [z * scale + 2 * 8 ** i for i, z in enumerate(zs)]
    bob += [3 * 8 ** i for i in range(n)]
    bob += _balancing_elements(n)
    return ReductionOutput(
        "partition", IntMultiset(tuple(alice)), IntMultiset(tuple(bob)),
        seed, tuple(ys))


def union_multiset(a: IntMultiset, b: IntMultiset) -> IntMultiset:
    return IntMultiset(a.elements + b.elements)


# ---------------------------------------------------------------------------
# privacy checking


@dataclass
class PrivacyVerdict:
    kind: str
    samples: int
    ok: bool
    exact_match: Optional[bool]  # oblivious side bit-exact across inputs
    max_z: float
    threshold_z: float
    failures: list = field(default_factory=list)


def _bonferroni_z(base_sigma: float, coordinates: int) -> float:
    """z threshold whose per-family false-alarm rate matches a single
    base_sigma-sided test, split evenly across coordinates."""
    nd = NormalDist()
    alpha = 2 * nd.cdf(-base_sigma)
    return nd.inv_cdf(1 - alpha / coordinates / 2)


def _fingerprints(kind: str, instance, seeds) -> list:
    """Fingerprint sampling without materializing the full output instances.

    Must stay in lockstep with the reduce_* functions; the agreement is
    pinned by tests.
    """
    if kind == "sat":
        n = instance.variable_count
        clause_list = enumerate_clauses(n)
        index = {c: i for i, c in enumerate(clause_list)}
        present = {index[c] for c in instance.clauses}
        big_n = len(clause_list)
        chosen = sorted(
            [i for i in range(big_n) if i in present]
            + [big_n + i for i in range(big_n) if i not in present])
        out = []
        for s in seeds:
            pi = fisher_yates(2 * big_n, make_rng(s))
            out.append(tuple(sorted(pi[i] for i in chosen)))
        return out
    if kind == "3col":
        n = max(instance.vertex_labels)
        pairs, pidx = _pair_index(n)
        big_n = len(pairs)
        offsets = [pidx[(v, w)] if frozenset({v, w}) in instance.edges
                   else big_n + pidx[(v, w)] for (v, w) in pairs]
        out = []
        for s in seeds:
            pi = fisher_yates(2 * big_n, make_rng(s))
            out.append(tuple(sorted(pi[o] for o in offsets)))
        return out
    if kind == "partition":
        n = len(instance.elements)
        p = partition_modulus(n)
        out = []
        for s in seeds:
            rng = make_rng(s)
            out.append(tuple(rng.randrange(p) for _ in range(n)))
        return out
    raise RejectedInput(f"unknown reduction kind {kind!r}")


def _size_parameter(kind: str, instance) -> int:
    if kind == "sat":
        return instance.variable_count
    if kind == "3col":
        return max(instance.vertex_labels)
    return len(instance.elements)


def _fingerprint_chunk(job):
    kind, instance, seeds = job
    return _fingerprints(kind, instance, seeds)


def _sample_fingerprints(kind: str, instance, seeds, jobs: int) -> list:
    if jobs <= 1 or len(seeds) < 4 * jobs:
        return _fingerprints(kind, instance, seeds)
    import multiprocessing

    chunk = -(-len(seeds) // jobs)
    work = [(kind, instance, seeds[i:i + chunk]) for i in range(0, len(seeds), chunk)]
    with multiprocessing.Pool(jobs) as pool:
        parts = pool.map(_fingerprint_chunk, work)
    return [fp for part in parts for fp in part]  # deterministic order


def check_privacy(kind: str, instance_a, instance_b, samples: int = 20000,
                  seed: int = 0, buckets: int = 16, jobs: int = 1) -> PrivacyVerdict:
    """Exact obliviousness plus frequency statistics of the random parts.

    The alice parts of the SAT and 3COL reductions are functions of the
    permutation alone, so under shared seeds they must agree bit-exactly
    across the two inputs.  The remaining randomness is summarized by a
    sufficient fingerprint (selected index subset, or the y-vector) whose
    per-coordinate frequencies are tested against the theoretical marginal
    at a Bonferroni-adjusted 4-standard-error threshold.
    """
    n = _size_parameter(kind, instance_a)
    if n != _size_parameter(kind, instance_b):
        raise RejectedInput("inputs must share the size parameter")

    exact = None
    if kind in ("sat", "3col"):
        exact = True
        for probe in range(5):
            s = child_seed(seed, f"exact{probe}")
            ra = reduce_sat(instance_a, s) if kind == "sat" else reduce_3col(instance_a, s)
            rb = reduce_sat(instance_b, s) if kind == "sat" else reduce_3col(instance_b, s)
            if ra.alice_part != rb.alice_part:
                exact = False

    seeds_a = [child_seed(seed, f"a{i}") for i in range(samples)]
    seeds_b = [child_seed(seed, f"b{i}") for i in range(samples)]
    fps_a = _sample_fingerprints(kind, instance_a, seeds_a, jobs)
    fps_b = _sample_fingerprints(kind, instance_b, seeds_b, jobs)

    failures = []
    max_z = 0.0
    if kind in ("sat", "3col"):
        # fingerprint = an N-subset of [2N]; each index appears w.p. 1/2
        two_n = 2 * len(fps_a[0])
        threshold = _bonferroni_z(4.0, 2 * two_n)
        se = math.sqrt(0.25 / samples)
        for label, fps in (("a", fps_a), ("b", fps_b)):
            counts = [0] * two_n
            for fp in fps:
                for j in fp:
                    counts[j] += 1
            for j, c in enumerate(counts):
                z = abs(c / samples - 0.5) / se
                max_z = max(max_z, z)
                if z > threshold:
                    failures.append((label, j, z))
    else:
        p = partition_modulus(n)
        coords = n * buckets
        threshold = _bonferroni_z(4.0, 2 * coords)
        for label, fps in (("a", fps_a), ("b", fps_b)):
            for i in range(n):
                counts = [0] * buckets
                for fp in fps:
                    counts[fp[i] * buckets // p] += 1
                for bucket in range(buckets):
                    lo = -(-bucket * p // buckets)  # smallest y with floor(y*16/p) == bucket
                    hi = -(-(bucket + 1) * p // buckets)
                    expect = (hi - lo) / p
                    se = math.sqrt(expect * (1 - expect) / samples)
                    z = abs(counts[bucket] / samples - expect) / se
                    max_z = max(max_z, z)
                    if z > threshold:
                        failures.append((label, (i, bucket), z))

    ok = (exact is not False) and not failures
    return PrivacyVerdict(kind=kind, samples=samples, ok=ok, exact_match=exact,
                          max_z=max_z, threshold_z=threshold, failures=failures)
