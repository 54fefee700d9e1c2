"""Aggregate run manifests into a measured-vs-bound table, CSV, and figures.

Each CLI run leaves a manifest with a metrics dict; the report collects
one row per run, recomputes the bound column from the row's own
parameters, and emits report.csv, report.txt, and (unless disabled)
fig_*.png rendered with the Agg backend.  Bounds are desk-scale formula
values; pass/fail is asserted only where the formula is a hard inequality
(degree floors, term counts), while size rows carry ratios that are
recorded, not judged.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

COLUMNS = ["instance", "family", "n", "t", "r", "m",
           "size", "degree", "bound", "ratio", "pass"]


def binom_sum(n: int, limit: int) -> int:
    return sum(math.comb(n, i) for i in range(min(limit, n) + 1))


def bound_for(metrics: dict):
    """The formula value a row is logged against, from its own fields."""
    fam = metrics.get("family")
    if fam == "degree":
        n, t = metrics["n"], metrics["t"]
        return math.ceil(2 * n / t)
    if fam == "idg1":
        n, m = metrics["n"], metrics["m"]
        return n / math.log2(m + 1)
    if fam == "cover":
        n, r, m = metrics["n"], metrics["r"], metrics["m"]
        return m * max(r, 1) * binom_sum(n, math.ceil(r / 2))
    if fam == "monotone_or":
        n = metrics["n"]
        return n * binom_sum(n, n // 3)
    if fam == "matmul":
        return 2 * metrics["t"]
    if fam == "code":
        n, r = metrics["n"], metrics["r"]
        return n * 2 ** n / binom_sum(n, r)
    return None


@dataclass
class ReportTable:
    rows: list = field(default_factory=list)
    flagged: list = field(default_factory=list)  # unreadable manifests

    def add_manifest(self, path: Path):
        try:
            data = json.loads(path.read_text())
            metrics = data.get("metrics") or {}
            fam = metrics.get("family")
            if fam is None:
                return
            row = {c: metrics.get(c, "") for c in COLUMNS}
            row["instance"] = data.get("name", path.stem)
            row["family"] = fam
            bound = bound_for(metrics)
            row["bound"] = round(bound, 4) if isinstance(bound, float) else bound
            size = metrics.get("size")
            if bound and size is not None:
                row["ratio"] = round(size / bound, 4)
            row["pass"] = _row_pass(metrics, bound)
            self.rows.append(row)
        except (json.JSONDecodeError, OSError, KeyError, TypeError) as exc:
            self.flagged.append((str(path), str(exc)))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=COLUMNS, lineterminator="\n")
        w.writeheader()
        for row in sorted(self.rows, key=lambda r: (r["family"], str(r["instance"]))):
            w.writerow(row)
        return buf.getvalue()

    def to_text(self) -> str:
        rows = sorted(self.rows, key=lambda r: (r["family"], str(r["instance"])))
        widths = {c: max([len(c)] + [len(str(r[c])) for r in rows]) for c in COLUMNS}
        lines = ["  ".join(c.ljust(widths[c]) for c in COLUMNS)]
        for r in rows:
            lines.append("  ".join(str(r[c]).ljust(widths[c]) for c in COLUMNS))
        for path, msg in self.flagged:
            lines.append(f"FLAGGED {path}: {msg}")
        return "\n".join(lines) + "\n"


def _row_pass(metrics: dict, bound):
    fam = metrics.get("family")
    if fam == "degree":
        return metrics.get("degree", 0) <= bound and metrics.get("ok", True)
    if fam == "idg1":
        deg = metrics.get("degree")
        return True if deg is None else deg + 1e-12 >= bound
    if fam == "matmul":
        return metrics.get("terms", 0) <= bound and bool(metrics.get("ok", True))
    # size families: ratios recorded, not asserted
    return bool(metrics.get("ok", True))


def collect(directory: Path) -> ReportTable:
    table = ReportTable()
    for path in sorted(directory.rglob("*.manifest.json")):
        table.add_manifest(path)
    return table


def render_figures(table: ReportTable, out_dir: Path) -> list:
    """Scatter measured size against the bound per family; degree vs t."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    written = []
    size_rows = [r for r in table.rows
                 if r["family"] in ("cover", "monotone_or", "code") and r["size"]]
    if size_rows:
        fig, ax = plt.subplots(figsize=(6, 4))
        for fam, color in (("cover", "tab:blue"), ("monotone_or", "tab:orange"),
                           ("code", "tab:green")):
            pts = [(r["bound"], r["size"]) for r in size_rows if r["family"] == fam]
            if pts:
                ax.scatter([p[0] for p in pts], [p[1] for p in pts],
                           label=fam, color=color)
        lims = ax.get_xlim()
        ax.plot(lims, lims, "k--", linewidth=0.8, label="size = bound")
        ax.set_xscale("log")
        ax.set_yscale("log")
        ax.set_xlabel("formula bound")
        ax.set_ylabel("measured size")
        ax.legend()
        fig.tight_layout()
        path = out_dir / "fig_sizes.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)

    deg_rows = [r for r in table.rows if r["family"] == "degree" and r["t"]]
    if deg_rows:
        fig, ax = plt.subplots(figsize=(6, 4))
        ts = sorted({r["t"] for r in deg_rows})
        measured = [max(r["degree"] for r in deg_rows if r["t"] == t) for t in ts]
        bounds = [max(r["bound"] for r in deg_rows if r["t"] == t) for t in ts]
        ax.plot(ts, measured, "o-", label="max measured degree")
        ax.plot(ts, bounds, "s--", label="ceil(2n/t)")
        ax.set_xlabel("block size t")
        ax.set_ylabel("Carol degree")
        ax.legend()
        fig.tight_layout()
        path = out_dir / "fig_degree.png"
        fig.savefig(path, dpi=120)
        plt.close(fig)
        written.append(path)
    return written
