#!/usr/bin/env python3
"""Run the robust-portfolio experiment grid and write CSV/SVG reports.

Defaults reproduce the full study (n = 200, k and b over {5, 10, 20},
10 instances per cell, all four methods).  Use --smoke for a small grid
that finishes in seconds.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from sparseball.harness import ExperimentConfig, emit_report, run_experiment


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="experiment_out", help="output directory")
    parser.add_argument("--seed", type=int, default=20260809)
    parser.add_argument("--smoke", action="store_true", help="tiny grid for a quick check")
    parser.add_argument("--no-timings", action="store_true",
                        help="zero the time_s column for byte-reproducible CSVs")
    args = parser.parse_args()

    if args.smoke:
        config = ExperimentConfig(n=24, k_list=(3,), b_list=(2.0,), instances_per_cell=2,
                                  seed=args.seed, record_wall_time=not args.no_timings)
    else:
        config = ExperimentConfig(seed=args.seed, record_wall_time=not args.no_timings)

    start = time.perf_counter()
    run = run_experiment(config)
    duration = time.perf_counter() - start
    paths = emit_report(run.records, args.out, metadata=run.metadata)
    print(f"{len(run.records)} records in {duration:.1f}s -> {args.out}")
    for path in paths:
        print(f"  {path}")
    if run.failures:
        print(f"WARNING: {len(run.failures)} solves failed (see metadata.json)")
        return 2

    # quick per-cell summary: how often each method has the best worst case
    by_instance = {}
    for r in run.records:
        by_instance.setdefault((r.k, r.b, r.instance), {})[r.method] = r
    best_counts = {m: 0 for m in config.methods}
    for group in by_instance.values():
        best = min(group.values(), key=lambda r: r.worst_case)
        best_counts[best.method] += 1
    print("best worst-case counts:", best_counts)
    return 0


if __name__ == "__main__":
    sys.exit(main())
