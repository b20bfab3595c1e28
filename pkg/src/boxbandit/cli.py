"""Command line front end: run experiments, solve allocations, print bounds."""

from __future__ import annotations

import argparse
import sys

from . import allocation, bbsea, harness


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="boxbandit", description="Boxed-bandit best arm identification experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the Monte Carlo sweep in a config file")
    p_run.add_argument("config")
    p_run.add_argument("--workers", type=int, default=1)
    p_run.add_argument("--out", default=None, help="output directory for CSV files")

    p_solve = sub.add_parser("solve", help="print T* and an optimal allocation")
    p_solve.add_argument("config")

    p_bounds = sub.add_parser("bounds", help="print partition-setting bounds")
    p_bounds.add_argument("config")

    args = parser.parse_args(argv)
    try:
        config = harness.load_config(args.config)
    except (harness.ParseError, harness.ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if args.command == "solve":
        result = allocation.solve(config.instance)
        print(f"t_star = {result.t_star:.10g}")
        print("w_star =", " ".join(f"{w:.6g}" for w in result.w_star))
        print(f"certificate_gap = {result.certificate_gap:.3g}")
        return 0

    if args.command == "bounds":
        if config.instance.arm_sets is None:
            print("error: bounds require a partition instance (arm_sets)", file=sys.stderr)
            return 2
        for delta in config.delta_grid:
            b = bbsea.theory_bounds(config.instance, delta)
            print(
                f"delta = {delta:g}: upper bound (sum beta_m) = {b.upper_bound:.6g}, "
                f"lower bound = {b.lower_bound:.6g}, "
                f"ratio = {b.upper_bound / b.lower_bound:.4g}"
            )
        return 0

    agg, trials = harness.run_experiment(config, workers=args.workers)
    table, _ = harness.emit_summary(agg)
    print(table)
    out_dir = args.out or config.output_path
    if out_dir:
        harness.write_outputs(agg, trials, out_dir)
        print(f"wrote {out_dir}/summary.csv and {out_dir}/trials.csv")
    if any(r.capped for r in agg):
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
