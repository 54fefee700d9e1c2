"""bsmwb: one binary, explicit seeds, deterministic artifacts.

Every invocation writes its artifacts plus a run manifest (input/output
digests, the exact argv, the seed) into --out-dir; `bsmwb rerun` replays a
manifest and fails if any artifact drifts by a byte.  Exit codes: 0 ok,
2 verification mismatch, 3 capacity, 4 parse/rejected input.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import bridges, combine, dovetail, formats, matmul, polydeg, report, splithide
from .core import lookup_protocol, measure, tabulate_pair, verify_exhaustive
from .errors import VerificationMismatch, WorkbenchError

VERSION = "bsmwb 0.1.0"


def _digest(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


class RunContext:
    def __init__(self, args, name: str):
        self.args = args
        self.name = name
        self.out_dir = Path(args.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.inputs = {}
        self.outputs = {}
        self.metrics = {}

    def read(self, path: str) -> str:
        p = Path(path)
        text = p.read_text()
        self.inputs[str(p)] = hashlib.sha256(text.encode()).hexdigest()
        return text

    def write(self, name: str, text: str) -> Path:
        p = self.out_dir / name
        p.write_text(text)
        self.outputs[name] = _digest(p)
        return p

    def write_manifest(self, exit_code: int):
        doc = {
            "version": VERSION,
            "name": self.name,
            "argv": self.args.original_argv,
            "seed": getattr(self.args, "seed", None),
            "inputs": self.inputs,
            "outputs": self.outputs,
            "metrics": self.metrics,
            "exit": exit_code,
        }
        path = self.out_dir / f"{self.name}.manifest.json"
        path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommand bodies; each returns an exit code


def cmd_reduce(args) -> int:
    ctx = RunContext(args, f"reduce-{args.kind}")
    text = ctx.read(args.infile)
    if args.kind == "sat":
        instance = formats.read_cnf(text)
        out = splithide.reduce_sat(instance, args.seed)
        ctx.write("alpha.cnf", formats.write_cnf(out.alice_part))
        ctx.write("beta.cnf", formats.write_cnf(out.bob_part))
    elif args.kind == "3col":
        instance = formats.read_graph(text)
        out = splithide.reduce_3col(instance, args.seed)
        ctx.write("a.graph", formats.write_graph(out.alice_part))
        ctx.write("b.graph", formats.write_graph(out.bob_part))
    else:
        instance = formats.read_multiset(text)
        out = splithide.reduce_partition(instance, args.seed)
        ctx.write("a.nums", formats.write_multiset(out.alice_part))
        ctx.write("b.nums", formats.write_multiset(out.bob_part))
    dest = args.out or "reduction.txt"
    ctx.write(dest, formats.write_reduction(out))
    ctx.metrics = {"kind": args.kind, "seed": args.seed}
    ctx.write_manifest(0)
    return 0


def cmd_privacy(args) -> int:
    ctx = RunContext(args, f"privacy-{args.kind}")
    readers = {"sat": formats.read_cnf, "3col": formats.read_graph,
               "partition": formats.read_multiset}
    ia = readers[args.kind](ctx.read(args.a))
    ib = readers[args.kind](ctx.read(args.b))
    verdict = splithide.check_privacy(args.kind, ia, ib,
                                      samples=args.samples, seed=args.seed,
                                      jobs=args.jobs)
    lines = [f"kind {verdict.kind}", f"samples {verdict.samples}",
             f"exact-oblivious-side {verdict.exact_match}",
             f"max-z {verdict.max_z:.3f}", f"threshold-z {verdict.threshold_z:.3f}",
             f"ok {verdict.ok}"]
    for f in verdict.failures:
        lines.append(f"FAIL {f}")
    ctx.write("privacy.txt", "\n".join(lines) + "\n")
    ctx.metrics = {"kind": args.kind, "ok": verdict.ok}
    code = 0 if verdict.ok else 2
    ctx.write_manifest(code)
    return code


def cmd_verify(args) -> int:
    ctx = RunContext(args, "verify")
    protocol = formats.read_protocol(ctx.read(args.proto))
    table = formats.read_table(ctx.read(args.fn))
    rep = verify_exhaustive(protocol, table)
    ctx.write("verify.txt", formats.report_text(rep))
    ctx.write("verify.csv", formats.report_csv(rep))
    ctx.metrics = {"mismatches": len(rep.mismatches), "ok": rep.ok}
    code = 0 if rep.ok else 2
    ctx.write_manifest(code)
    return code


def cmd_measure(args) -> int:
    ctx = RunContext(args, "measure")
    protocol = formats.read_protocol(ctx.read(args.proto))
    meas = measure(protocol)
    lines = [f"alice-length {meas.alice_length}", f"bob-length {meas.bob_length}",
             f"gates {meas.cost.gate_count}", f"degree {meas.cost.degree}",
             f"depth {meas.cost.depth}", f"unaudited {meas.unaudited}"]
    ctx.write("measure.txt", "\n".join(lines) + "\n")
    ctx.write_manifest(0)
    return 0


def cmd_degree_reduce(args) -> int:
    tag = f"t{args.t}" if args.t else f"b{args.budget}"
    ctx = RunContext(args, f"degree-reduce-{tag}")
    table = formats.read_table(ctx.read(args.fn))
    n = table.arity // 2
    t = args.t if args.t else polydeg.t_for_budget(n, args.budget)
    protocol = polydeg.degree_reduce_protocol(table, t)
    rep = verify_exhaustive(protocol, table)
    meas = measure(protocol)
    ctx.write("protocol.bsm", formats.write_protocol(protocol))
    ctx.metrics = {
        "family": "degree", "n": n, "t": t,
        "degree": meas.cost.degree, "size": meas.cost.gate_count,
        "alice_length": meas.alice_length,
        "length_bound": math.ceil(n / t) * ((1 << t) - 1),
        "ok": rep.ok,
    }
    code = 0 if rep.ok else 2
    ctx.write_manifest(code)
    return code


def cmd_degree_search(args) -> int:
    ctx = RunContext(args, f"degree-idg1-m{args.m}")
    table = formats.read_table(ctx.read(args.fn))
    outcome = polydeg.search_idg1_protocol(table, args.m)
    if outcome.found:
        ctx.write("protocol.bsm", formats.write_protocol(outcome.protocol))
        bound = polydeg.check_degree_bounds(outcome.protocol)
        ctx.metrics = {"family": "idg1", "n": table.arity // 2, "m": args.m,
                       "found": True, "degree": bound.degree, "ok": bound.holds,
                       "scanned": outcome.pairs_scanned}
    else:
        ctx.write("certificate.txt",
                  f"no bilinear-form protocol at m={args.m}; "
                  f"{outcome.pairs_scanned} map pairs exhausted\n")
        ctx.metrics = {"family": "idg1", "n": table.arity // 2, "m": args.m,
                       "found": False, "scanned": outcome.pairs_scanned}
    ctx.write_manifest(0)
    return 0


def cmd_mv_find(args) -> int:
    ctx = RunContext(args, f"mv-find-{args.n}-{args.k}")
    fam = polydeg.find_mv_family(args.n, args.k)
    if fam is None:
        ctx.write("family.txt", f"no family of size {args.n} at k={args.k}\n")
        ctx.metrics = {"family": "mv", "size": args.n, "k": args.k, "ok": False}
        ctx.write_manifest(0)
        return 0
    ctx.write("family.mv", formats.write_mv_family(fam))
    ctx.metrics = {"family": "mv", "size": fam.size, "k": fam.dimension, "ok": True}
    ctx.write_manifest(0)
    return 0


def cmd_mv_protocol(args) -> int:
    ctx = RunContext(args, "mv-protocol")
    fam = formats.read_mv_family(ctx.read(args.family))
    protocol = polydeg.mv_equality_protocol(fam)
    n = protocol.input_arity
    rep = verify_exhaustive(protocol, polydeg.equality_table(n))
    ctx.write("protocol.bsm", formats.write_protocol(protocol))
    meas = measure(protocol)
    ctx.metrics = {"family": "mv", "n": n, "k": fam.dimension,
                   "degree": meas.cost.degree, "ok": rep.ok}
    code = 0 if rep.ok else 2
    ctx.write_manifest(code)
    return code


def cmd_code_greedy(args) -> int:
    ctx = RunContext(args, f"code-{args.n}-{args.r}")
    code = combine.greedy_covering_code(args.n, args.r)
    ctx.write("code.txt", formats.write_code(code))
    ctx.metrics = {"family": "code", "n": args.n, "r": args.r,
                   "m": code.size, "size": code.size, "ok": True}
    ctx.write_manifest(0)
    return 0


def cmd_combine(args) -> int:
    ctx = RunContext(args, f"combine-{args.mode}")
    table = formats.read_table(ctx.read(args.fn))
    n = table.arity
    if args.mode == "dnf-and":
        dnf = combine.minterm_dnf(table)
        protocol = combine.dnf_protocol_and(dnf)
        target = tabulate_pair(table, lambda a, b: a & b)
        fam = "combine"
    elif args.mode == "monotone-or":
        protocol = combine.monotone_protocol_or(table)
        target = tabulate_pair(table, lambda a, b: a | b)
        fam = "monotone_or"
    elif args.mode == "alt":
        protocol = combine.alternation_protocol_or(table)
        target = tabulate_pair(table, lambda a, b: a | b)
        fam = "combine"
    else:  # cover-or
        if args.code:
            code = formats.read_code(ctx.read(args.code))
        else:
            r = args.r if args.r is not None else math.ceil((1 - 1 / math.sqrt(2)) * n)
            code = combine.greedy_covering_code(n, r)
        protocol = combine.covering_code_protocol_or(table, code)
        target = tabulate_pair(table, lambda a, b: a | b)
        fam = "cover"
    rep = verify_exhaustive(protocol, target)
    meas = measure(protocol)
    ctx.write("protocol.bsm", formats.write_protocol(protocol))
    ctx.metrics = {"family": fam, "n": n, "size": meas.cost.gate_count,
                   "alice_length": meas.alice_length, "ok": rep.ok}
    if fam == "cover":
        ctx.metrics.update({"r": code.radius, "m": code.size})
    code_ = 0 if rep.ok else 2
    ctx.write_manifest(code_)
    return code_


def cmd_to_circuit(args) -> int:
    ctx = RunContext(args, "to-circuit")
    table = formats.read_table(ctx.read(args.fn))
    protocol = (formats.read_protocol(ctx.read(args.proto)) if args.proto
                else combine.xor_lookup_protocol(table))
    ev = combine.bsm_to_circuit(protocol, table)
    bad = [z for z in range(1 << table.arity) if ev(z) != table.value(z)]
    lines = [f"arity {ev.arity}", f"table-entries {ev.table_entries}",
             f"total-size {ev.total_size}", f"mismatches {len(bad)}"]
    ctx.write("evaluator.txt", "\n".join(lines) + "\n")
    ctx.metrics = {"family": "combine", "n": table.arity,
                   "size": ev.total_size, "ok": not bad}
    code = 0 if not bad else 2
    ctx.write_manifest(code)
    return code


def cmd_bridge(args) -> int:
    ctx = RunContext(args, f"bridge-{args.mode}")
    lines = []
    ok = True
    if args.mode in ("xor-ih", "sh-ih", "ih-bsm"):
        g = formats.read_table(ctx.read(args.fn))
        protocol = (formats.read_protocol(ctx.read(args.infile)) if args.infile
                    else combine.xor_lookup_protocol(g))
        if args.mode == "sh-ih":
            scheme = bridges.splithide_bsm_to_ih(
                bridges.xor_split_encoding(g.arity), protocol, g)
        else:
            scheme = bridges.xor_bsm_to_ih(protocol, g)
        lines += [f"input-arity {scheme.input_arity}",
                  f"answer-bits {scheme.answer_bits}",
                  f"randomness-bits {scheme.rand_bits}",
                  "correct-and-private True"]
        if args.mode == "ih-bsm":
            back, f_table = bridges.ih_to_bsm(scheme)
            ctx.write("protocol.bsm", formats.write_protocol(
                lookup_protocol(f_table)))
            lines.append(f"reconstructed-arity {back.input_arity}")
    elif args.mode == "pir-ih":
        g = formats.read_table(ctx.read(args.fn))
        code = bridges.hadamard_code(1 << g.arity)
        pir = bridges.smooth_ldc_to_pir(code)
        scheme = bridges.pir_to_ih(pir, g)
        lines += [f"database-length {pir.database_length}",
                  f"input-arity {scheme.input_arity}",
                  "correct-and-private True"]
    else:  # ldc-pir
        code = bridges.hadamard_code(args.n)
        pir = bridges.smooth_ldc_to_pir(code)
        lines += [f"database-length {pir.database_length}",
                  f"codeword-length {code.codeword_length}",
                  "correct-and-private True"]
    ctx.write("bridge.txt", "\n".join(lines) + "\n")
    ctx.metrics = {"family": "bridge", "mode": args.mode, "ok": ok}
    ctx.write_manifest(0)
    return 0


def cmd_matmul_extract(args) -> int:
    ctx = RunContext(args, "matmul-extract")
    circuit = (matmul.parse_circuit(ctx.read(args.circuit)) if args.circuit
               else matmul.strassen_circuit())
    ax, bx = matmul.raw_entry_bindings(args.n)
    _, decomp = matmul.extract_low_degree(circuit, ax, bx)
    valid = matmul.verify_decomposition(decomp, args.n)
    ctx.write("decomp.txt", matmul.write_decomposition(decomp))
    t = circuit.multiplication_count
    ctx.metrics = {"family": "matmul", "n": args.n, "t": t,
                   "terms": decomp.rank, "ok": bool(valid)}
    code = 0 if valid and decomp.rank <= 2 * t else 2
    ctx.write_manifest(code)
    return code


def cmd_matmul_verify(args) -> int:
    ctx = RunContext(args, "matmul-verify")
    decomp = matmul.read_decomposition(ctx.read(args.decomp))
    valid = matmul.verify_decomposition(decomp, args.n)
    ctx.write("verify.txt", f"valid {bool(valid)}\n")
    ctx.metrics = {"family": "matmul", "n": args.n, "t": decomp.rank,
                   "terms": decomp.rank, "ok": bool(valid)}
    code = 0 if valid else 2
    ctx.write_manifest(code)
    return code


def cmd_dovetail(args) -> int:
    ctx = RunContext(args, "dovetail")
    if args.lang == "eq":
        lang = dovetail.eq_language()
    elif args.lang == "prefix":
        lang = dovetail.prefix_language()
    else:
        pairs = []
        for line in ctx.read(args.pairs).splitlines():
            line = line.strip()
            if line:
                x, y = (line.split() + [""])[:2]
                pairs.append((x, y))
        lang = dovetail.language_from_pairs(pairs)
    trace = dovetail.DovetailTrace() if args.trace else None
    bit = dovetail.run_protocol(args.x, args.y, lang, trace=trace)
    msg_a = dovetail.alice_message(args.x, lang)
    msg_b = dovetail.bob_message(args.y, lang)
    lines = [f"x {args.x or '-'}", f"y {args.y or '-'}",
             f"alice-count {msg_a.count}", f"bob-count {msg_b.count}",
             f"alice-bits {msg_a.bit_length()}", f"bob-bits {msg_b.bit_length()}",
             f"accept {bit}"]
    ctx.write("dovetail.txt", "\n".join(lines) + "\n")
    if trace is not None:
        rows = ["sweep,x,y"] + [f"{s},{a},{b}" for s, a, b in trace.rows]
        ctx.write(args.trace, "\n".join(rows) + "\n")
    ctx.metrics = {"family": "dovetail", "accept": bit, "ok": True}
    ctx.write_manifest(0)
    return 0


def cmd_report(args) -> int:
    ctx = RunContext(args, "report")
    table = report.collect(Path(args.results))
    ctx.write("report.csv", table.to_csv())
    ctx.write("report.txt", table.to_text())
    if not args.no_figs:
        for fig in report.render_figures(table, ctx.out_dir):
            ctx.outputs[fig.name] = _digest(fig)
    ctx.metrics = {"rows": len(table.rows), "flagged": len(table.flagged)}
    ctx.write_manifest(0)
    return 0


def cmd_rerun(args) -> int:
    manifest = json.loads(Path(args.manifest).read_text())
    argv = list(manifest["argv"])
    if "--out-dir" in argv:
        at = argv.index("--out-dir")
        argv[at + 1] = args.out_dir
    else:
        argv += ["--out-dir", args.out_dir]
    code = main(argv)
    if code != manifest["exit"]:
        print(f"rerun exit {code} != recorded {manifest['exit']}", file=sys.stderr)
        return 2
    for name, digest in manifest["outputs"].items():
        p = Path(args.out_dir) / name
        if not p.exists() or _digest(p) != digest:
            print(f"artifact {name} drifted", file=sys.stderr)
            return 2
    return 0


# ---------------------------------------------------------------------------
# argument surface


def build_parser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="bsmwb", description=__doc__)
    top.add_argument("--seed", type=int, default=0)
    top.add_argument("--limit-bits", type=int, default=None,
                     help="override the exhaustive verification ceiling")
    top.add_argument("--jobs", type=int, default=1)
    top.add_argument("--out-dir", default=".")
    # the same globals are accepted after the (sub)command
    shared = argparse.ArgumentParser(add_help=False)
    shared.add_argument("--seed", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--limit-bits", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--jobs", type=int, default=argparse.SUPPRESS)
    shared.add_argument("--out-dir", default=argparse.SUPPRESS)
    sub = top.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reduce", parents=[shared], help="run a split reduction")
    p.add_argument("kind", choices=["sat", "3col", "partition"])
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("privacy", parents=[shared], help="check the privacy property")
    p.add_argument("kind", choices=["sat", "3col", "partition"])
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--samples", type=int, default=20000)
    p.set_defaults(handler=cmd_privacy)

    p = sub.add_parser("verify", parents=[shared],
                       help="exhaustively verify a protocol")
    p.add_argument("--proto", required=True)
    p.add_argument("--fn", required=True)
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("measure", parents=[shared], help="measure a protocol's cost")
    p.add_argument("--proto", required=True)
    p.set_defaults(handler=cmd_measure)

    deg = sub.add_parser("degree", help="degree-bounded polynomial protocols")
    dsub = deg.add_subparsers(dest="degree_command", required=True)
    p = dsub.add_parser("reduce", parents=[shared])
    p.add_argument("--fn", required=True)
    p.add_argument("--t", type=int, default=None)
    p.add_argument("--budget", type=int, default=None,
                   help="message budget; picks t = ceil(log2(m/4n))")
    p.set_defaults(handler=cmd_degree_reduce)
    p = dsub.add_parser("search-idg1", parents=[shared])
    p.add_argument("--fn", required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(handler=cmd_degree_search)

    mv = sub.add_parser("mv", help="matching vector families over Z6")
    msub = mv.add_subparsers(dest="mv_command", required=True)
    p = msub.add_parser("find", parents=[shared])
    p.add_argument("--n", type=int, required=True, help="family size")
    p.add_argument("--k", type=int, required=True, help="dimension")
    p.set_defaults(handler=cmd_mv_find)
    p = msub.add_parser("protocol", parents=[shared])
    p.add_argument("--family", required=True)
    p.set_defaults(handler=cmd_mv_protocol)

    p = sub.add_parser("code", help="covering codes").add_subparsers(
        dest="code_command", required=True).add_parser("greedy", parents=[shared])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.set_defaults(handler=cmd_code_greedy)

    p = sub.add_parser("combine", parents=[shared],
                       help="protocols for bitwise-combined targets")
    p.add_argument("mode", choices=["dnf-and", "monotone-or", "alt", "cover-or",
                                    "to-circuit"])
    p.add_argument("--fn", required=True)
    p.add_argument("--code", default=None)
    p.add_argument("--r", type=int, default=None)
    p.add_argument("--proto", default=None)
    p.set_defaults(handler=lambda a: cmd_to_circuit(a) if a.mode == "to-circuit"
                   else cmd_combine(a))

    p = sub.add_parser("bridge", parents=[shared], help="model conversions")
    p.add_argument("mode", choices=["xor-ih", "sh-ih", "ih-bsm", "pir-ih", "ldc-pir"])
    p.add_argument("--in", dest="infile", default=None)
    p.add_argument("--fn", default=None)
    p.add_argument("--n", type=int, default=4)
    p.set_defaults(handler=cmd_bridge)

    mm = sub.add_parser("matmul", help="bilinear extraction")
    mmsub = mm.add_subparsers(dest="matmul_command", required=True)
    p = mmsub.add_parser("extract", parents=[shared])
    p.add_argument("--circuit", default=None,
                   help="circuit IR file; defaults to the 7-product 2x2 referee")
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(handler=cmd_matmul_extract)
    p = mmsub.add_parser("verify", parents=[shared])
    p.add_argument("--decomp", required=True)
    p.add_argument("--n", type=int, required=True)
    p.set_defaults(handler=cmd_matmul_verify)

    p = sub.add_parser("dovetail", help="counting protocol demo").add_subparsers(
        dest="dovetail_command", required=True).add_parser("run", parents=[shared])
    p.add_argument("--lang", choices=["eq", "prefix", "custom"], default="eq")
    p.add_argument("--pairs", default=None, help="pair list for --lang custom")
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--trace", default=None, help="write the schedule CSV here")
    p.set_defaults(handler=cmd_dovetail)

    p = sub.add_parser("report", parents=[shared],
                       help="aggregate manifests into a table")
    p.add_argument("results")
    p.add_argument("--no-figs", action="store_true")
    p.set_defaults(handler=cmd_report)

    p = sub.add_parser("rerun", parents=[shared],
                       help="replay a manifest and compare digests")
    p.add_argument("manifest")
    p.set_defaults(handler=cmd_rerun)
    return top


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    args.original_argv = argv
    if args.limit_bits is not None:
        os.environ["BSMWB_LIMIT_BITS"] = str(args.limit_bits)
    try:
        return args.handler(args)
    except VerificationMismatch as exc:
        print(f"error[verify]: {exc}", file=sys.stderr)
        return exc.exit_code
    except WorkbenchError as exc:
        kind = type(exc).__name__
        print(f"error[{kind}]: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
