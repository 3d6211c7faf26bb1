"""Command-line interface: convergence runs, rate fits, and the reuse demo."""

from __future__ import annotations

import argparse
import sys

from .harness import rates_from_csv, reuse_demo, run_case
from .linsys import CgError


def _parse_counts(text: str) -> list[int]:
    try:
        counts = [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad counts list {text!r}")
    if not counts or any(c < 1 for c in counts):
        raise argparse.ArgumentTypeError("counts must be positive integers")
    return counts


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wsm",
        description="Finite-element solves of elastic dislocations with "
                    "weakly enforced slip")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a test case over a mesh sequence")
    run.add_argument("--case", required=True, choices=["I", "II", "III"])
    run.add_argument("--order", type=int, default=1, choices=[1, 2])
    run.add_argument("--counts", type=_parse_counts, default=[4, 8, 16, 32])
    run.add_argument("--exclusion", type=float, default=0.1)
    run.add_argument("--out", default=None, help="CSV output path")
    run.add_argument("--append", action="store_true",
                     help="append rows to an existing CSV")
    run.add_argument("--tol", type=float, default=1e-10)

    rates = sub.add_parser("rates", help="fit convergence rates from a CSV")
    rates.add_argument("--in", dest="input", required=True)
    rates.add_argument("--metric", default="l2_local")

    demo = sub.add_parser("reuse-demo",
                          help="time repeated solves sharing one stiffness")
    demo.add_argument("--counts", type=int, default=32)
    demo.add_argument("--order", type=int, default=1, choices=[1, 2])
    demo.add_argument("--faults", type=int, default=10)
    demo.add_argument("--seed", type=int, default=42)
    return parser


def cmd_run(args) -> int:
    reports = run_case(args.case, args.order, args.counts,
                       exclusion=args.exclusion, out=args.out,
                       rel_tol=args.tol, append=args.append)
    for r in reports:
        surf = ""
        if r.l2_surf_global is not None:
            surf = (f"  l2_surf={r.l2_surf_global:.4e}"
                    f"  l2_surf_loc={r.l2_surf_local:.4e}")
        print(f"case {r.case} p={r.order} counts={'x'.join(map(str, r.counts))}"
              f"  h={r.h:.4e}  l2={r.l2_global:.4e}  h1={r.h1_global:.4e}"
              f"  l2_loc={r.l2_local:.4e}  h1_loc={r.h1_local:.4e}{surf}"
              f"  cg={r.solve.iterations}")
    if args.out:
        print(f"wrote {args.out}")
    return 0


def cmd_rates(args) -> int:
    for case, p, fit in rates_from_csv(args.input, args.metric):
        print(f"case {case} p={p} {args.metric}: slope={fit.slope:.2f} "
              f"r2={fit.r2:.4f}")
    return 0


def cmd_reuse_demo(args) -> int:
    res = reuse_demo(counts=args.counts, p=args.order,
                     n_faults=args.faults, seed=args.seed)
    print(f"assembly {res.assembly_time * 1e3:8.1f} ms   "
          f"preconditioner {res.factor_time * 1e3:8.1f} ms")
    print(f"{'fault':>5} {'reused':>6} {'time_ms':>9} {'cg_iters':>8}")
    for i, (t, it) in enumerate(zip(res.fault_times, res.iterations)):
        print(f"{i:5d} {'yes' if i > 0 else 'no':>6} {t * 1e3:9.1f} {it:8d}")
    warm = res.fault_times[1:] or res.fault_times
    print(f"cold run {res.cold_time * 1e3:.1f} ms; "
          f"mean warm fault {1e3 * sum(warm) / len(warm):.1f} ms")
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return cmd_run(args)
        if args.command == "rates":
            return cmd_rates(args)
        return cmd_reuse_demo(args)
    except CgError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return 2
    except (KeyError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
