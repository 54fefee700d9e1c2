"""File codecs: DIMACS, edge lists, multisets, tables, protocols, reports.

All writers emit deterministic bytes (sorted, no timestamps) so re-runs
can be compared byte for byte.
"""

from __future__ import annotations

import csv
import io

from .combine import CoveringCode
from .core import (BsmProtocol, CircuitCarol, LookupCarol, Message,
                   PolynomialCarol, TruthTable, VerificationReport)
from .errors import ParseError, RejectedInput
from .polydeg import ModularPolynomial, MvFamily
from .splithide import Cnf, Graph, IntMultiset, ReductionOutput

# ---------------------------------------------------------------------------
# truth tables: "arity N" header then 0/1 characters (whitespace ignored)


def write_table(table: TruthTable) -> str:
    bits = table.values_string()
    rows = [bits[i:i + 64] for i in range(0, len(bits), 64)]
    return f"arity {table.arity}\n" + "\n".join(rows) + "\n"


def read_table(text: str) -> TruthTable:
    lines = [l.split("#")[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines or not lines[0].startswith("arity"):
        raise ParseError("expected 'arity N' header", line=1)
    try:
        arity = int(lines[0].split()[1])
    except (IndexError, ValueError):
        raise ParseError("bad arity header", line=1)
    bits = "".join(lines[1:])
    if set(bits) - {"0", "1"} or len(bits) != 1 << arity:
        raise ParseError(f"expected {1 << arity} bits of table data")
    return TruthTable.from_values([int(c) for c in bits])


# ---------------------------------------------------------------------------
# DIMACS CNF


def write_cnf(cnf: Cnf) -> str:
    lines = [f"p cnf {cnf.variable_count} {len(cnf.clauses)}"]
    for clause in cnf.clauses:
        lines.append(" ".join(str(l) for l in sorted(clause, key=abs)) + " 0")
    return "\n".join(lines) + "\n"


def read_cnf(text: str) -> Cnf:
    nvars = None
    clauses = []
    pending = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("bad problem line", line=lineno)
            nvars = int(parts[2])
            continue
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad literal {tok!r}", line=lineno)
            if lit == 0:
                clauses.append(frozenset(pending))
                pending = []
            else:
                pending.append(lit)
    if pending:
        clauses.append(frozenset(pending))
    if nvars is None:
        raise ParseError("missing 'p cnf' header")
    return Cnf(nvars, tuple(clauses))


# ---------------------------------------------------------------------------
# graphs: header "n m", then one edge per line; labels may be names


def _label_token(v) -> str:
    return str(v)


def _parse_label(tok: str):
    return int(tok) if tok.isdigit() else tok


def write_graph(graph: Graph) -> str:
    labels = sorted(graph.vertex_labels, key=str)
    edges = sorted(tuple(sorted(e, key=str)) for e in graph.edges)
    lines = [f"{len(labels)} {len(edges)}"]
    if any(not isinstance(v, int) for v in labels):
        lines.append("vertices " + " ".join(_label_token(v) for v in labels))
    for u, v in edges:
        lines.append(f"{_label_token(u)} {_label_token(v)}")
    return "\n".join(lines) + "\n"


def read_graph(text: str) -> Graph:
    lines = [l.split("#")[0].strip() for l in text.splitlines()]
    lines = [l for l in lines if l]
    if not lines:
        raise ParseError("empty graph file")
    try:
        n, m = (int(t) for t in lines[0].split())
    except ValueError:
        raise ParseError("bad graph header", line=1)
    idx = 1
    labels = None
    if idx < len(lines) and lines[idx].startswith("vertices"):
        labels = frozenset(_parse_label(t) for t in lines[idx].split()[1:])
        idx += 1
    edges = []
    for lineno, line in enumerate(lines[idx:], idx + 1):
        toks = line.split()
        if len(toks) != 2:
            raise ParseError(f"bad edge line {line!r}", line=lineno)
        edges.append(frozenset(_parse_label(t) for t in toks))
    if len(edges) != m:
        raise ParseError(f"header says {m} edges, found {len(edges)}")
    if labels is None:
        labels = frozenset(range(1, n + 1))
    return Graph(labels, frozenset(edges))


# ---------------------------------------------------------------------------
# multisets: one decimal per line


def write_multiset(ms: IntMultiset) -> str:
    return "\n".join(str(x) for x in ms.elements) + "\n"


def read_multiset(text: str) -> IntMultiset:
    vals = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#")[0].strip()
        if not line:
            continue
        try:
            vals.append(int(line))
        except ValueError:
            raise ParseError(f"bad integer {line!r}", line=lineno)
    return IntMultiset(tuple(vals))


# ---------------------------------------------------------------------------
# reduction outputs: a two-section document with the seed embedded


_PART_CODECS = {
    "sat": (write_cnf, read_cnf),
    "3col": (write_graph, read_graph),
    "partition": (write_multiset, read_multiset),
}


def write_reduction(out: ReductionOutput) -> str:
    wr = _PART_CODECS[out.kind][0]
    return (f"bsmwb-reduction v1\nkind {out.kind}\nseed {out.seed}\n"
            f"[alice]\n{wr(out.alice_part)}[bob]\n{wr(out.bob_part)}")


def read_reduction(text: str) -> ReductionOutput:
    lines = text.splitlines()
    if not lines or lines[0] != "bsmwb-reduction v1":
        raise ParseError("not a reduction document", line=1)
    kind = lines[1].split()[1]
    seed = int(lines[2].split()[1])
    try:
        a_at = lines.index("[alice]")
        b_at = lines.index("[bob]")
    except ValueError:
        raise ParseError("missing [alice]/[bob] sections")
    rd = _PART_CODECS[kind][1]
    alice = rd("\n".join(lines[a_at + 1:b_at]))
    bob = rd("\n".join(lines[b_at + 1:]))
    return ReductionOutput(kind, alice, bob, seed, fingerprint=())


# ---------------------------------------------------------------------------
# protocols


def _hex_row(msg: Message) -> str:
    if not msg.symbols:
        return "-"
    return "".join(format(s, "x") for s in msg.symbols)


def _parse_hex_row(row: str, modulus: int) -> Message:
    if row == "-":
        return Message(modulus, ())
    return Message(modulus, tuple(int(c, 16) for c in row))


def write_protocol(protocol: BsmProtocol) -> str:
    carol = protocol.carol
    lines = [
        "bsmwb-protocol v1",
        f"arity {protocol.input_arity}",
        f"modulus {protocol.modulus}",
        f"label {protocol.label or '-'}",
        "[alice]",
    ]
    lines += [_hex_row(m) for m in protocol.alice_map]
    lines.append("[bob]")
    lines += [_hex_row(m) for m in protocol.bob_map]
    lines.append("[carol]")
    if isinstance(carol, LookupCarol):
        lines.append("kind lookup")
        for (a, b), bit in sorted(carol.table.items()):
            lines.append(f"{_hex_row(Message(16, a))} {_hex_row(Message(16, b))} {bit}")
    elif isinstance(carol, CircuitCarol):
        lines.append("kind circuit")
        lines.append(f"inputs {carol.na} {carol.nb}")
        for gate in carol.gates:
            lines.append(" ".join(str(t) for t in gate))
        lines.append(f"result {carol.output}")
    elif isinstance(carol, PolynomialCarol):
        lines.append("kind poly")
        lines.append(f"poly-modulus {carol.poly.modulus}")
        lines.append(f"vars {carol.na} {carol.nb}")
        lines.append("predicate " + "".join(str(v) for v in carol.predicate))
        for mono in sorted(carol.poly.monomials):
            coeff = carol.poly.monomials[mono]
            lines.append(f"{coeff}:" + ",".join(str(v) for v in mono))
    else:
        raise RejectedInput(f"Carol kind {carol.kind!r} has no serial form")
    return "\n".join(lines) + "\n"


def read_protocol(text: str) -> BsmProtocol:
    lines = text.splitlines()
    if not lines or lines[0] != "bsmwb-protocol v1":
        raise ParseError("not a protocol document", line=1)
    header = {}
    idx = 1
    while idx < len(lines) and not lines[idx].startswith("["):
        key, val = lines[idx].split(maxsplit=1)
        header[key] = val
        idx += 1
    arity = int(header["arity"])
    modulus = int(header["modulus"])
    label = "" if header.get("label", "-") == "-" else header["label"]

    def section(name):
        nonlocal idx
        if lines[idx] != f"[{name}]":
            raise ParseError(f"expected [{name}]", line=idx + 1)
        idx += 1
        out = []
        while idx < len(lines) and not lines[idx].startswith("["):
            if lines[idx].strip():
                out.append(lines[idx])
            idx += 1
        return out

    alice = tuple(_parse_hex_row(r, modulus) for r in section("alice"))
    bob = tuple(_parse_hex_row(r, modulus) for r in section("bob"))
    carol_lines = section("carol")
    kind = carol_lines[0].split()[1]
    if kind == "lookup":
        table = {}
        for row in carol_lines[1:]:
            a, b, bit = row.split()
            table[(_parse_hex_row(a, 16).symbols,
                   _parse_hex_row(b, 16).symbols)] = int(bit)
        carol = LookupCarol(table)
    elif kind == "circuit":
        na, nb = (int(t) for t in carol_lines[1].split()[1:])
        gates = []
        output = None
        for row in carol_lines[2:]:
            toks = row.split()
            if toks[0] == "result":
                output = int(toks[1])
            else:
                gates.append((toks[0], *(int(t) for t in toks[1:])))
        carol = CircuitCarol(na, nb, gates, output)
    elif kind == "poly":
        pmod = int(carol_lines[1].split()[1])
        na, nb = (int(t) for t in carol_lines[2].split()[1:])
        predicate = tuple(int(c) for c in carol_lines[3].split()[1])
        monos = {}
        for row in carol_lines[4:]:
            coeff, _, vs = row.partition(":")
            mono = tuple(int(v) for v in vs.split(",")) if vs else ()
            monos[mono] = int(coeff)
        carol = PolynomialCarol(ModularPolynomial(pmod, na + nb, monos),
                                predicate, na, nb)
    else:
        raise ParseError(f"unknown Carol kind {kind!r}")
    return BsmProtocol(arity, alice, bob, carol, label=label)


# ---------------------------------------------------------------------------
# verification reports


def report_text(report: VerificationReport) -> str:
    lines = [f"pairs-checked {report.pairs_checked}",
             f"mismatches {len(report.mismatches)}"]
    for x, y, want, got in report.mismatches:
        lines.append(f"x={x} y={y} expected={want} produced={got}")
    return "\n".join(lines) + "\n"


def report_csv(report: VerificationReport) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["x", "y", "expected", "produced"])
    for row in report.mismatches:
        w.writerow(row)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# covering codes: "n r" header, one binary word per line


def write_code(code: CoveringCode) -> str:
    lines = [f"{code.length} {code.radius}"]
    lines += [format(c, f"0{code.length}b") for c in code.codewords]
    return "\n".join(lines) + "\n"


def read_code(text: str) -> CoveringCode:
    lines = [l.split("#")[0].strip() for l in text.splitlines() if l.strip()]
    try:
        n, r = (int(t) for t in lines[0].split())
    except (ValueError, IndexError):
        raise ParseError("bad code header", line=1)
    words = tuple(int(l, 2) for l in lines[1:])
    return CoveringCode(n, r, words)


# ---------------------------------------------------------------------------
# polynomials and matching vector families


def write_polynomial(poly: ModularPolynomial) -> str:
    lines = [f"modulus {poly.modulus}", f"vars {poly.variable_count}"]
    for mono in sorted(poly.monomials):
        lines.append(f"{poly.monomials[mono]}:" + ",".join(str(v) for v in mono))
    return "\n".join(lines) + "\n"


def write_mv_family(fam: MvFamily) -> str:
    lines = [f"k {fam.dimension}", f"size {fam.size}"]
    for vec in fam.u_vectors + fam.v_vectors:
        lines.append("".join(str(c) for c in vec))
    return "\n".join(lines) + "\n"


def read_mv_family(text: str) -> MvFamily:
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    try:
        k = int(lines[0].split()[1])
        size = int(lines[1].split()[1])
    except (ValueError, IndexError):
        raise ParseError("bad family header")
    rows = [tuple(int(c) for c in l) for l in lines[2:]]
    if len(rows) != 2 * size or any(len(r) != k for r in rows):
        raise ParseError("family row count or width mismatch")
    return MvFamily(k, tuple(rows[:size]), tuple(rows[size:]))
