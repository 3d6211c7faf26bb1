#!/usr/bin/env python3
"""Log-log convergence figures from the solver's results CSV.

Reads the harness CSV schema (case, p, h, and the error-norm columns), draws
one figure per (case, order) with one line per requested metric, annotates
each line with the least-squares slope of its last three points, and writes
deterministic SVG files named {case}_{p}.svg.  Reruns produce byte-identical
output: fixed style, fixed hash salt, no timestamps.

Usage:
    plot_convergence.py --in results.csv --out figs/ \
        --metrics l2_global,h1_global,l2_local,h1_local
"""

from __future__ import annotations

import argparse
import csv
import math
import pathlib
import sys
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "wsm-convergence-plots"
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "l2_global": dict(color="#1f77b4", marker="o", label="L2 global"),
    "h1_global": dict(color="#d62728", marker="s", label="H1 global"),
    "l2_local": dict(color="#2ca02c", marker="^", label="L2 local"),
    "h1_local": dict(color="#9467bd", marker="v", label="H1 local"),
    "l2_surf_global": dict(color="#8c564b", marker="D", label="L2 surface"),
    "l2_surf_local": dict(color="#e377c2", marker="P", label="L2 surface local"),
    "slip_norm": dict(color="#7f7f7f", marker="x", label="slip norm"),
}


@dataclass
class PlotSpec:
    input_csv: str
    metrics: list
    out_dir: str
    ref_slopes: list = field(default_factory=list)


def read_rows(path: str) -> list[dict]:
    with open(path, newline="") as f:
        rows = [row for row in csv.DictReader(f) if row.get("case") != "case"]
    if not rows:
        raise ValueError(f"no data rows in {path}")
    return rows


def fit_slope(hs, es) -> float:
    """Least-squares slope of log(e) vs log(h) over the last three points."""
    lh = [math.log(h) for h in hs[-3:]]
    le = [math.log(e) for e in es[-3:]]
    n = len(lh)
    mh = sum(lh) / n
    me = sum(le) / n
    num = sum((a - mh) * (b - me) for a, b in zip(lh, le))
    den = sum((a - mh) ** 2 for a in lh)
    return num / den


def plot_convergence(spec: PlotSpec) -> list[pathlib.Path]:
    rows = read_rows(spec.input_csv)
    for m in spec.metrics:
        if m not in rows[0]:
            raise KeyError(f"metric column {m!r} not present in the CSV")

    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        groups.setdefault((row["case"], int(row["p"])), []).append(row)

    out_dir = pathlib.Path(spec.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    for (case, p) in sorted(groups):
        series = sorted(groups[(case, p)], key=lambda r: -float(r["h"]))
        fig, ax = plt.subplots(figsize=(5.0, 4.0))
        hs_all = [float(r["h"]) for r in series]
        for m in spec.metrics:
            pts = [(float(r["h"]), float(r[m]))
                   for r in series if r.get(m, "") != ""]
            if len(pts) < 3:
                continue
            hs = [h for h, _ in pts]
            es = [e for _, e in pts]
            slope = fit_slope(hs, es)
            style = STYLE.get(m, dict(marker="o", label=m))
            ax.loglog(hs, es, linewidth=1.4, markersize=5,
                      label=f"{style.get('label', m)} (slope {slope:.2f})",
                      color=style.get("color"), marker=style.get("marker"))
        for s in spec.ref_slopes:
            href = [min(hs_all), max(hs_all)]
            e0 = min(float(r[m]) for r in series for m in spec.metrics
                     if r.get(m, "") != "")
            ax.loglog(href, [e0 * (h / href[1]) ** s for h in href],
                      "k--", linewidth=0.7, alpha=0.5,
                      label=f"O(h^{s:g})")
        ax.set_xlabel("mesh size h")
        ax.set_ylabel("error")
        ax.set_title(f"case {case}, order {p}")
        ax.grid(True, which="both", alpha=0.3)
        ax.legend(fontsize=8)
        fig.tight_layout()
        path = out_dir / f"{case}_{p}.svg"
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
        written.append(path)
    return written


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        description="log-log convergence figures from a results CSV")
    parser.add_argument("--in", dest="input", required=True)
    parser.add_argument("--out", dest="out_dir", required=True)
    parser.add_argument("--metrics", default="l2_global,h1_global,l2_local,h1_local")
    parser.add_argument("--ref-slopes", default="",
                        help="comma-separated guide-line slopes")
    args = parser.parse_args(argv)
    refs = [float(s) for s in args.ref_slopes.split(",") if s]
    spec = PlotSpec(input_csv=args.input,
                    metrics=[m for m in args.metrics.split(",") if m],
                    out_dir=args.out_dir, ref_slopes=refs)
    try:
        written = plot_convergence(spec)
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
