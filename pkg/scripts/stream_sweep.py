#!/usr/bin/env python3
"""Stream throughput vs. item size for direct and proxy-decoupled modes.

For each payload size, runs both streaming deployments and reports
tasks/second against the (n-1)/task_time ceiling, plus how many bulk
bytes the dispatcher itself had to touch.
"""

import argparse
import csv
from pathlib import Path

from proxykit.bench import BenchConfig, run_stream
from proxykit.bench.records import STREAM_MODES, STREAM_SERIES_FIELDS, write_series_csv


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="results/stream", metavar="DIR")
    parser.add_argument("--n", type=int, default=8)
    parser.add_argument(
        "--sizes", type=int, nargs="+", default=[100_000, 1_000_000, 10_000_000]
    )
    parser.add_argument("--task-time", type=float, default=1.0)
    parser.add_argument("--duration", type=float, default=8.0)
    parser.add_argument("--warmup", type=float, default=2.0)
    parser.add_argument("--backend", default="memory", choices=("memory", "file", "relay"))
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--simulated-clock", action="store_true")
    args = parser.parse_args()

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    for size in args.sizes:
        for mode in STREAM_MODES:
            config = BenchConfig(
                "stream",
                mode,
                n=args.n,
                data_size=size,
                task_time=args.task_time,
                duration=args.duration,
                warmup=args.warmup,
                backend=args.backend,
                seed=args.seed,
                simulated_clock=args.simulated_clock,
            )
            run = run_stream(config)
            write_series_csv(out / f"series_{mode}_d{size}.csv", STREAM_SERIES_FIELDS, run.series)
            rows.append(
                (mode, size, run.throughput, run.ceiling, run.dispatcher_bulk_bytes,
                 run.payload_bytes_total)
            )
            print(
                f"d={size:>9} {mode:<12} {run.throughput:.2f}/s "
                f"(ceiling {run.ceiling:.2f}, dispatcher bulk {run.dispatcher_bulk_bytes} B)"
            )

    with (out / "throughput_vs_size.csv").open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ("mode", "data_size", "tasks_per_s", "ceiling", "dispatcher_bulk_bytes",
             "payload_bytes_total")
        )
        writer.writerows(rows)
    print(f"wrote {out / 'throughput_vs_size.csv'}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
