"""Bilinear extraction from arithmetic referees, with exact rationals.

Given a referee circuit over preprocessed matrix inputs, every wire's
polynomial splits by bidegree in (X, Y) into a constant part c, a linear
X part a, a linear Y part b, and a bilinear part ab.  Addition acts
componentwise; a product P*Q obeys

    c(PQ)  = c(P) c(Q)
    a(PQ)  = c(P) a(Q) + a(P) c(Q)
    b(PQ)  = c(P) b(Q) + b(P) c(Q)
    ab(PQ) = c(P) ab(Q) + ab(P) c(Q) + a(P).b(Q) + b(P).a(Q)

so each multiplication gate contributes at most two fresh rank-one terms
a(P) (x) b(Q) and a(Q) (x) b(P), and every wire's bilinear part is a
rational combination of the terms collected so far.  Leaf polynomials are
truncated to their constant-plus-linear part at binding time: pieces of
higher degree cannot reach bidegree (1,1) in any output.  Scalar multiples
and additions are free; terms with an identically zero side are dropped,
so the reported rank can undercut twice the multiplication count.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .errors import ParseError, RejectedInput

# polynomials are dicts: monomial tuple (sorted var names, with multiplicity) -> Fraction


def poly_add(p: dict, q: dict, scale=Fraction(1)) -> dict:
    out = dict(p)
    for mono, coeff in q.items():
        val = out.get(mono, Fraction(0)) + scale * coeff
        if val:
            out[mono] = val
        else:
            out.pop(mono, None)
    return out


def poly_mul(p: dict, q: dict) -> dict:
    out = {}
    for m1, c1 in p.items():
        for m2, c2 in q.items():
            mono = tuple(sorted(m1 + m2))
            val = out.get(mono, Fraction(0)) + c1 * c2
            if val:
                out[mono] = val
            else:
                out.pop(mono, None)
    return out


def poly_scale(p: dict, scale: Fraction) -> dict:
    return {m: c * scale for m, c in p.items() if c * scale}


# ---------------------------------------------------------------------------
# circuits


@dataclass(frozen=True)
class Gate:
    op: str  # alice | bob | const | add | mul | smul
    args: tuple


@dataclass
class ArithCircuit:
    """DAG of arithmetic gates over exact rationals.

    Wires are named; a gate may only reference earlier wires, which makes
    the list a topological order.  Scalar multiples are free; only `mul`
    gates count toward the multiplication count.
    """

    wires: list  # of (name, Gate)
    outputs: list

    _WIRE_ARGS = {"add": (0, 1), "mul": (0, 1), "smul": (1,),
                  "alice": (), "bob": (), "const": ()}

    def __post_init__(self):
        seen = set()
        for name, gate in self.wires:
            if name in seen:
                raise RejectedInput(f"wire {name} defined twice")
            if gate.op not in self._WIRE_ARGS:
                raise RejectedInput(f"unknown gate op {gate.op!r}")
            for slot in self._WIRE_ARGS[gate.op]:
                if gate.args[slot] not in seen:
                    raise RejectedInput(
                        f"wire {name} references undefined {gate.args[slot]}")
            seen.add(name)
        for out in self.outputs:
            if out not in seen:
                raise RejectedInput(f"output {out} undefined")

    @property
    def multiplication_count(self) -> int:
        return sum(1 for _, g in self.wires if g.op == "mul")


@dataclass
class LowDegreeParts:
    c: Fraction
    a: dict  # X variable -> coefficient
    b: dict  # Y variable -> coefficient
    ab: dict  # (X variable, Y variable) -> coefficient


@dataclass
class TensorDecomposition:
    """Rank-one terms (linear form in X, linear form in Y) plus, per output,
    the rational weights expressing that output's bilinear part over the
    terms."""

    terms: list  # of (dict X->Fraction, dict Y->Fraction)
    output_weights: list  # per output: list of Fractions, one per term

    @property
    def rank(self) -> int:
        return len(self.terms)

    def expand_output(self, index: int) -> dict:
        out = {}
        for w, (u, v) in zip(self.output_weights[index], self.terms):
            if not w:
                continue
            for xv, cx in u.items():
                for yv, cy in v.items():
                    key = (xv, yv)
                    val = out.get(key, Fraction(0)) + w * cx * cy
                    if val:
                        out[key] = val
                    else:
                        out.pop(key, None)
        return out


def _truncate_leaf(poly: dict, variables: set) -> tuple:
    """Constant and linear parts of a leaf polynomial; higher degrees drop."""
    c = poly.get((), Fraction(0))
    lin = {}
    for mono, coeff in poly.items():
        if len(mono) == 1:
            if mono[0] not in variables:
                raise RejectedInput(f"leaf variable {mono[0]} bound to the wrong side")
            lin[mono[0]] = coeff
        elif len(mono) > 1:
            if any(v not in variables for v in mono):
                raise RejectedInput(f"leaf monomial {mono} mixes sides")
    return c, lin


def extract_low_degree(circuit: ArithCircuit, alice_polys: dict,
                       bob_polys: dict) -> tuple:
    """Per-output LowDegreeParts plus the collected TensorDecomposition.

    alice_polys / bob_polys bind each leaf wire to a polynomial in the X /
    Y entries (dict monomial-tuple -> Fraction or numeric).
    """
    xvars = {v for poly in alice_polys.values() for mono in poly for v in mono}
    yvars = {v for poly in bob_polys.values() for mono in poly for v in mono}
    if xvars & yvars:
        raise RejectedInput("X and Y variable names must be disjoint")

    terms = []
    parts = {}

    def fresh_term(u: dict, v: dict) -> Optional[int]:
        if not u or not v:
            return None
        terms.append((dict(u), dict(v)))
        return len(terms) - 1

    for name, gate in circuit.wires:
        if gate.op == "alice":
            poly = _normalize_poly(alice_polys.get(gate.args[0]))
            if poly is None:
                raise RejectedInput(f"alice wire {name} has no bound polynomial")
            c, lin = _truncate_leaf(poly, xvars)
            parts[name] = LowDegreeParts(c, lin, {}, {})
        elif gate.op == "bob":
            poly = _normalize_poly(bob_polys.get(gate.args[0]))
            if poly is None:
                raise RejectedInput(f"bob wire {name} has no bound polynomial")
            c, lin = _truncate_leaf(poly, yvars)
            parts[name] = LowDegreeParts(c, {}, lin, {})
        elif gate.op == "const":
            parts[name] = LowDegreeParts(Fraction(gate.args[0]), {}, {}, {})
        elif gate.op == "add":
            p, q = parts[gate.args[0]], parts[gate.args[1]]
            parts[name] = LowDegreeParts(
                p.c + q.c, poly_add(p.a, q.a), poly_add(p.b, q.b),
                poly_add(p.ab, q.ab))
        elif gate.op == "smul":
            scale = Fraction(gate.args[0])
            p = parts[gate.args[1]]
            parts[name] = LowDegreeParts(
                scale * p.c, poly_scale(p.a, scale), poly_scale(p.b, scale),
                poly_scale(p.ab, scale))
        elif gate.op == "mul":
            p, q = parts[gate.args[0]], parts[gate.args[1]]
            ab = poly_add(poly_scale(q.ab, p.c), poly_scale(p.ab, q.c))
            t1 = fresh_term(p.a, q.b)
            if t1 is not None:
                ab = poly_add(ab, {("term", t1): Fraction(1)})
            t2 = fresh_term(q.a, p.b)
            if t2 is not None:
                ab = poly_add(ab, {("term", t2): Fraction(1)})
            parts[name] = LowDegreeParts(
                p.c * q.c,
                poly_add(poly_scale(q.a, p.c), poly_scale(p.a, q.c)),
                poly_add(poly_scale(q.b, p.c), poly_scale(p.b, q.c)),
                ab)
        else:
            raise RejectedInput(f"unknown gate op {gate.op!r}")

    # ab parts are tracked over term handles; materialize both views
    weights = []
    out_parts = []
    for out in circuit.outputs:
        p = parts[out]
        wvec = [Fraction(0)] * len(terms)
        for key, coeff in p.ab.items():
            wvec[key[1]] = coeff
        weights.append(wvec)
        explicit = {}
        for w, (u, v) in zip(wvec, terms):
            if not w:
                continue
            for xv, cx in u.items():
                for yv, cy in v.items():
                    val = explicit.get((xv, yv), Fraction(0)) + w * cx * cy
                    if val:
                        explicit[(xv, yv)] = val
                    else:
                        explicit.pop((xv, yv), None)
        out_parts.append(LowDegreeParts(p.c, dict(p.a), dict(p.b), explicit))

    used = sorted({i for wvec in weights for i, w in enumerate(wvec) if w})
    decomp = TensorDecomposition(
        terms=[terms[i] for i in used],
        output_weights=[[wvec[i] for i in used] for wvec in weights])
    return out_parts, decomp


def _normalize_poly(poly) -> Optional[dict]:
    if poly is None:
        return None
    return {tuple(mono): Fraction(c) for mono, c in poly.items()}


def variable_poly(name: str) -> dict:
    return {(name,): Fraction(1)}


# ---------------------------------------------------------------------------
# the matrix product target


def matmul_variables(n: int) -> tuple:
    xs = [f"X{i+1}{j+1}" for i in range(n) for j in range(n)]
    ys = [f"Y{i+1}{j+1}" for i in range(n) for j in range(n)]
    return xs, ys


def matmul_bilinear_target(n: int) -> list:
    """The n^2 bilinear forms of the product, outputs ordered row-major."""
    outs = []
    for i in range(n):
        for k in range(n):
            outs.append({(f"X{i+1}{j+1}", f"Y{j+1}{k+1}"): Fraction(1)
                         for j in range(n)})
    return outs


def verify_decomposition(decomp: TensorDecomposition, n: int,
                         spot_checks: int = 100, seed: int = 0) -> int:
    """1 iff the expanded decomposition equals the n x n product exactly.

    Coefficient-by-coefficient comparison, then `spot_checks` random
    rational matrix pairs evaluated both ways in exact arithmetic.
    """
    targets = matmul_bilinear_target(n)
    if len(decomp.output_weights) != len(targets):
        return 0
    for idx, want in enumerate(targets):
        if decomp.expand_output(idx) != want:
            return 0

    import random

    rng = random.Random(seed)

    def rand_matrix(prefix):
        return {f"{prefix}{i+1}{j+1}": Fraction(rng.randint(-9, 9), rng.randint(1, 9))
                for i in range(n) for j in range(n)}

    for _ in range(spot_checks):
        xv, yv = rand_matrix("X"), rand_matrix("Y")
        term_vals = [
            (sum(c * xv[v] for v, c in u.items()),
             sum(c * yv[v] for v, c in v_.items()))
            for u, v_ in decomp.terms]
        for i in range(n):
            for k in range(n):
                direct = sum(xv[f"X{i+1}{j+1}"] * yv[f"Y{j+1}{k+1}"]
                             for j in range(n))
                via = sum(w * tu * tv for w, (tu, tv) in
                          zip(decomp.output_weights[i * n + k], term_vals))
                if direct != via:
                    return 0
    return 1


def strassen_circuit() -> ArithCircuit:
    """The seven-product 2x2 referee over raw matrix entries."""
    wires = []
    for name in ("X11", "X12", "X21", "X22"):
        wires.append((name, Gate("alice", (name,))))
    for name in ("Y11", "Y12", "Y21", "Y22"):
        wires.append((name, Gate("bob", (name,))))

    def add(name, a, b):
        wires.append((name, Gate("add", (a, b))))

    def sub(name, a, b):
        wires.append((name + "_neg", Gate("smul", (Fraction(-1), b))))
        wires.append((name, Gate("add", (a, name + "_neg"))))

    def mul(name, a, b):
        wires.append((name, Gate("mul", (a, b))))

    add("s1", "X11", "X22")
    add("s2", "Y11", "Y22")
    mul("M1", "s1", "s2")
    add("s3", "X21", "X22")
    mul("M2", "s3", "Y11")
    sub("s4", "Y12", "Y22")
    mul("M3", "X11", "s4")
    sub("s5", "Y21", "Y11")
    mul("M4", "X22", "s5")
    add("s6", "X11", "X12")
    mul("M5", "s6", "Y22")
    sub("s7", "X21", "X11")
    add("s8", "Y11", "Y12")
    mul("M6", "s7", "s8")
    sub("s9", "X12", "X22")
    add("s10", "Y21", "Y22")
    mul("M7", "s9", "s10")

    add("t1", "M1", "M4")
    sub("t2", "t1", "M5")
    add("C11", "t2", "M7")
    add("C12", "M3", "M5")
    add("C21", "M2", "M4")
    sub("t3", "M1", "M2")
    add("t4", "t3", "M3")
    add("C22", "t4", "M6")
    return ArithCircuit(wires, ["C11", "C12", "C21", "C22"])


def raw_entry_bindings(n: int) -> tuple:
    xs, ys = matmul_variables(n)
    return ({v: variable_poly(v) for v in xs}, {v: variable_poly(v) for v in ys})


# ---------------------------------------------------------------------------
# line-based IR


def parse_circuit(text: str) -> ArithCircuit:
    """Parse the line IR: `alice X11`, `bob Y11`, `w = add a b`,
    `w = mul a b`, `w = smul 3/2 a`, `w = const 3/2`, `output w [w2 ...]`.

    Operands may be wire names or inline constants `c(3/2)`.
    """
    wires = []
    outputs = []
    auto = [0]

    def operand(tok, lineno):
        if tok.startswith("c(") and tok.endswith(")"):
            auto[0] += 1
            name = f"_c{auto[0]}"
            wires.append((name, Gate("const", (Fraction(tok[2:-1]),))))
            return name
        return tok

    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        toks = line.split()
        try:
            if toks[0] in ("alice", "bob"):
                for name in toks[1:]:
                    wires.append((name, Gate(toks[0], (name,))))
            elif toks[0] == "output":
                outputs.extend(toks[1:])
            elif len(toks) >= 3 and toks[1] == "=":
                name, op = toks[0], toks[2]
                if op == "add":
                    wires.append((name, Gate("add", (operand(toks[3], lineno),
                                                     operand(toks[4], lineno)))))
                elif op == "mul":
                    wires.append((name, Gate("mul", (operand(toks[3], lineno),
                                                     operand(toks[4], lineno)))))
                elif op == "smul":
                    wires.append((name, Gate("smul", (Fraction(toks[3]),
                                                      operand(toks[4], lineno)))))
                elif op == "const":
                    wires.append((name, Gate("const", (Fraction(toks[3]),))))
                else:
                    raise ParseError(f"unknown op {op!r}", line=lineno)
            else:
                raise ParseError(f"unparseable line {line!r}", line=lineno)
        except (IndexError, ValueError) as exc:
            raise ParseError(f"bad circuit line {line!r}: {exc}", line=lineno)
    try:
        return ArithCircuit(wires, outputs)
    except RejectedInput as exc:
        raise ParseError(str(exc))


def write_decomposition(decomp: TensorDecomposition) -> str:
    """One line per term `X-form | Y-form`, then per-output weight rows."""
    lines = ["bsmwb-decomp v1", f"terms {decomp.rank}"]

    def form(d):
        return ",".join(f"{v}={c}" for v, c in sorted(d.items())) or "0"

    for u, v in decomp.terms:
        lines.append(f"{form(u)} | {form(v)}")
    for wvec in decomp.output_weights:
        lines.append("weights " + " ".join(str(w) for w in wvec))
    return "\n".join(lines) + "\n"


def read_decomposition(text: str) -> TensorDecomposition:
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines or lines[0] != "bsmwb-decomp v1":
        raise ParseError("not a decomposition document", line=1)
    count = int(lines[1].split()[1])

    def parse_form(tok):
        if tok == "0":
            return {}
        out = {}
        for item in tok.split(","):
            var, _, coeff = item.partition("=")
            out[var] = Fraction(coeff)
        return out

    terms = []
    for row in lines[2:2 + count]:
        left, _, right = row.partition("|")
        terms.append((parse_form(left.strip()), parse_form(right.strip())))
    weights = []
    for row in lines[2 + count:]:
        toks = row.split()
        if toks[0] != "weights":
            raise ParseError(f"expected weights row, got {row!r}")
        weights.append([Fraction(t) for t in toks[1:]])
    return TensorDecomposition(terms, weights)


def write_circuit(circuit: ArithCircuit) -> str:
    lines = []
    for name, gate in circuit.wires:
        if gate.op in ("alice", "bob"):
            lines.append(f"{gate.op} {name}")
        elif gate.op == "const":
            lines.append(f"{name} = const {gate.args[0]}")
        elif gate.op == "smul":
            lines.append(f"{name} = smul {gate.args[0]} {gate.args[1]}")
        else:
            lines.append(f"{name} = {gate.op} {gate.args[0]} {gate.args[1]}")
    lines.append("output " + " ".join(circuit.outputs))
    return "\n".join(lines) + "\n"
