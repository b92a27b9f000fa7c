#!/usr/bin/env python3
"""Live-object traces for the three map-reduce cleanup policies.

Runs the memory benchmark in default, manual, and ownership modes,
writes each sampled object-count series to CSV, and checks that the
ownership policy evicts in the same event order as the hand-written
manual policy.
"""

import argparse
from pathlib import Path

from proxykit.bench import BenchConfig, run_memory
from proxykit.bench.records import MEMORY_MODES, MEMORY_SERIES_FIELDS, write_series_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/memory", metavar="DIR")
    parser.add_argument("--n", type=int, default=8, help="mappers per round")
    parser.add_argument("--rounds", type=int, default=4)
    parser.add_argument("--data-size", type=int, default=1_000_000)
    parser.add_argument("--output-size", type=int, default=100_000)
    parser.add_argument("--task-time", type=float, default=0.5)
    parser.add_argument("--backend", default="memory", choices=("memory", "file", "relay"))
    parser.add_argument("--simulated-clock", action="store_true")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    runs = {}
    for mode in MEMORY_MODES:
        config = BenchConfig(
            "memory",
            mode,
            n=args.n,
            rounds=args.rounds,
            data_size=args.data_size,
            output_size=args.output_size,
            task_time=args.task_time,
            backend=args.backend,
            simulated_clock=args.simulated_clock,
        )
        run = run_memory(config)
        runs[mode] = run
        write_series_csv(
            out / f"objects_{mode}.csv",
            MEMORY_SERIES_FIELDS,
            [(f"{t:.3f}", count, total) for t, count, total in run.series],
        )
        print(
            f"{mode:<10} created {run.objects_created:>3}  "
            f"final active {run.final_object_count:>3}  evictions {len(run.trace)}"
        )

    same = runs["ownership"].trace == runs["manual"].trace
    print(f"ownership eviction order matches manual: {same}")
    print(f"wrote series CSVs under {out}")
    return 0 if same else 1


if __name__ == "__main__":
    raise SystemExit(main())
