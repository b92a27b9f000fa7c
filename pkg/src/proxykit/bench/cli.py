"""Benchmark command line: ``bench pipeline|stream|memory``.

Desk-scale defaults keep every benchmark in the seconds-to-minutes range;
all parameters are flags, so larger configurations stay reachable.
"""

from __future__ import annotations

import argparse
from pathlib import Path

from .memory import run_memory
from .pipeline import run_pipeline
from .records import (
    BenchConfig,
    MEMORY_MODES,
    MEMORY_SERIES_FIELDS,
    PIPELINE_MODES,
    STREAM_MODES,
    STREAM_SERIES_FIELDS,
    config_summary,
    write_pipeline_csv,
    write_series_csv,
    write_summary_json,
)
from .schedule import ideal_reduction
from .stream import run_stream


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = parser.add_subparsers(dest="benchmark", required=True)
    for name, modes, defaults in (
        ("pipeline", PIPELINE_MODES, {"data_size": 1_000_000}),
        ("stream", STREAM_MODES, {"data_size": 100_000}),
        ("memory", MEMORY_MODES, {"data_size": 1_000_000, "task_time": 0.5}),
    ):
        cmd = sub.add_parser(name, help=f"run the {name} benchmark")
        cmd.add_argument(
            "--mode",
            default="all",
            choices=modes + ("all",),
            help="which deployment to run (default: all)",
        )
        cmd.add_argument("--n", type=int, default=8, help="task/worker count (default %(default)s)")
        cmd.add_argument(
            "--data-size",
            type=int,
            default=defaults["data_size"],
            metavar="BYTES",
            help="payload size in bytes (default %(default)s)",
        )
        cmd.add_argument(
            "--task-time",
            type=float,
            default=defaults.get("task_time", 1.0),
            metavar="SECS",
            help="simulated compute time per task (default %(default)s)",
        )
        cmd.add_argument(
            "--overhead-frac",
            type=float,
            default=0.2,
            metavar="F",
            help="fraction of task time spent in startup overhead (default %(default)s)",
        )
        cmd.add_argument(
            "--backend",
            default="memory",
            choices=("memory", "file", "relay"),
            help="mediated channel for bulk payloads (default %(default)s)",
        )
        cmd.add_argument("--out", default="bench-out", metavar="DIR", help="output directory")
        cmd.add_argument("--seed", type=int, default=0, metavar="S", help="payload/sampling seed")
        cmd.add_argument(
            "--simulated-clock",
            action="store_true",
            help="replay the deterministic schedule instead of running threads",
        )
        cmd.add_argument(
            "--submit-latency",
            type=float,
            default=0.05,
            metavar="SECS",
            help="engine submit cost per task (default %(default)s)",
        )
        cmd.add_argument(
            "--bandwidth",
            type=float,
            default=10_000_000.0,
            metavar="BYTES_PER_SEC",
            help="engine bandwidth for payloads embedded in task submissions",
        )
        if name == "stream":
            cmd.add_argument("--duration", type=float, default=8.0, help="producer run time (s)")
            cmd.add_argument("--warmup", type=float, default=2.0, help="seconds excluded from throughput")
        if name == "memory":
            cmd.add_argument("--rounds", type=int, default=4, help="map-reduce rounds")
            cmd.add_argument(
                "--output-size", type=int, default=100_000, metavar="BYTES",
                help="mapper output size (default %(default)s)",
            )
    return parser


def _config_from_args(args: argparse.Namespace, mode: str) -> BenchConfig:
    config = BenchConfig(
        benchmark=args.benchmark,
        mode=mode,
        n=args.n,
        data_size=args.data_size,
        task_time=args.task_time,
        overhead_frac=args.overhead_frac,
        backend=args.backend,
        out_dir=args.out,
        seed=args.seed,
        simulated_clock=args.simulated_clock,
        submit_latency=args.submit_latency,
        bandwidth=args.bandwidth,
    )
    if args.benchmark == "stream":
        config.duration = args.duration
        config.warmup = args.warmup
    if args.benchmark == "memory":
        config.rounds = args.rounds
        config.output_size = args.output_size
    return config


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    all_modes = {"pipeline": PIPELINE_MODES, "stream": STREAM_MODES, "memory": MEMORY_MODES}
    modes = all_modes[args.benchmark] if args.mode == "all" else (args.mode,)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    summary: dict = {"benchmark": args.benchmark, "runs": {}}
    for mode in modes:
        config = _config_from_args(args, mode)
        config.validate()
        if args.benchmark == "pipeline":
            run = run_pipeline(config)
            csv_path = out / f"pipeline_{mode}_f{config.overhead_frac:g}.csv"
            write_pipeline_csv(csv_path, run.records)
            ideal = ideal_reduction(
                config.n, config.task_time, config.overhead_frac, config.submit_latency
            )
            summary["runs"][mode] = {
                "makespan_s": run.makespan,
                "bytes_put": run.bytes_put,
                "bytes_gotten": run.bytes_gotten,
                "csv": str(csv_path),
                "ideal_pipelined_reduction": ideal,
                "config": config_summary(config),
            }
            print(f"pipeline {mode}: makespan {run.makespan:.3f}s ({csv_path})")
        elif args.benchmark == "stream":
            run = run_stream(config)
            csv_path = out / f"stream_{mode}_d{config.data_size}.csv"
            write_series_csv(csv_path, STREAM_SERIES_FIELDS, run.series)
            summary["runs"][mode] = {
                "throughput_tasks_per_s": run.throughput,
                "ceiling_tasks_per_s": run.ceiling,
                "items_sent": run.items_sent,
                "tasks_completed": run.tasks_completed,
                "dispatcher_bulk_bytes": run.dispatcher_bulk_bytes,
                "payload_bytes_total": run.payload_bytes_total,
                "csv": str(csv_path),
                "config": config_summary(config),
            }
            print(
                f"stream {mode}: {run.throughput:.2f} tasks/s "
                f"(ceiling {run.ceiling:.2f}, dispatcher bulk {run.dispatcher_bulk_bytes} B)"
            )
        else:
            run = run_memory(config)
            csv_path = out / f"memory_{mode}.csv"
            write_series_csv(
                csv_path,
                MEMORY_SERIES_FIELDS,
                [(f"{t:.3f}", count, total) for t, count, total in run.series],
            )
            summary["runs"][mode] = {
                "objects_created": run.objects_created,
                "final_object_count": run.final_object_count,
                "final_total_bytes": run.final_total_bytes,
                "eviction_trace": [[r, role] for r, role in run.trace],
                "csv": str(csv_path),
                "config": config_summary(config),
            }
            print(
                f"memory {mode}: created {run.objects_created}, "
                f"final active {run.final_object_count}"
            )
    summary_path = out / f"{args.benchmark}_summary.json"
    write_summary_json(summary_path, summary)
    print(f"summary written to {summary_path}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
