#!/usr/bin/env python3
"""Makespan vs. overhead fraction for the three pipeline deployments.

Sweeps the startup-overhead fraction and runs every mode at each point,
writing one summary CSV plus per-run task timelines.  Desk-scale defaults
finish in a few minutes; use --fractions/--n/--task-time to rescale.
"""

import argparse
import csv
from pathlib import Path

from proxykit.bench import BenchConfig, ideal_reduction, run_pipeline
from proxykit.bench.records import PIPELINE_MODES, write_pipeline_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/pipeline", metavar="DIR")
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument("--data-size", type=int, default=1_000_000)
    parser.add_argument("--task-time", type=float, default=1.0)
    parser.add_argument("--backend", default="memory", choices=("memory", "file", "relay"))
    parser.add_argument(
        "--fractions",
        type=float,
        nargs="+",
        default=[0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9],
    )
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--simulated-clock", action="store_true")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for frac in args.fractions:
        for mode in PIPELINE_MODES:
            config = BenchConfig(
                "pipeline",
                mode,
                n=args.n,
                data_size=args.data_size,
                task_time=args.task_time,
                overhead_frac=frac,
                backend=args.backend,
                seed=args.seed,
                simulated_clock=args.simulated_clock,
                poll_interval=0.01,
            )
            run = run_pipeline(config)
            write_pipeline_csv(out / f"tasks_{mode}_f{frac:g}.csv", run.records)
            rows.append((mode, frac, run.makespan))
            print(f"f={frac:<4} {mode:<13} makespan {run.makespan:.3f}s")
        ideal = ideal_reduction(args.n, args.task_time, frac, config.submit_latency)
        print(f"f={frac:<4} ideal pipelined reduction {ideal * 100:.1f}%")

    with (out / "makespan_vs_overhead.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(("mode", "overhead_frac", "makespan_s"))
        writer.writerows(rows)
    print(f"wrote {out / 'makespan_vs_overhead.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
