"""Benchmark configuration, per-task phase records, and result emission."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

PIPELINE_MODES = ("no_proxy", "proxy", "proxy_future")
STREAM_MODES = ("direct", "proxystream")
MEMORY_MODES = ("default", "manual", "ownership")
BACKENDS = ("memory", "file", "relay")

PIPELINE_FIELDS = (
    "task_id",
    "submit",
    "start",
    "overhead_done",
    "input_resolved",
    "compute_done",
    "result_received",
)

STREAM_SERIES_FIELDS = ("second", "tasks_completed")
MEMORY_SERIES_FIELDS = ("elapsed_s", "object_count", "total_bytes")


@dataclass
class TaskRecord:
    """Phase timestamps for one task, seconds relative to run start."""

    task_id: int
    submit: float = 0.0
    start: float = 0.0
    overhead_done: float = 0.0
    input_resolved: float = 0.0
    compute_done: float = 0.0
    result_received: float = 0.0
    bytes_in: int = 0
    bytes_out: int = 0

    def phases(self) -> tuple[float, ...]:
        return (
            self.submit,
            self.start,
            self.overhead_done,
            self.input_resolved,
            self.compute_done,
            self.result_received,
        )

    def is_monotone(self) -> bool:
        stamps = self.phases()
        return all(b >= a for a, b in zip(stamps, stamps[1:]))


@dataclass
class BenchConfig:
    benchmark: str
    mode: str
    n: int = 8
    data_size: int = 1_000_000
    task_time: float = 1.0
    overhead_frac: float = 0.2
    backend: str = "memory"
    out_dir: Optional[str] = None
    seed: int = 0
    simulated_clock: bool = False
    # engine model: fixed per-submit latency plus payload bytes over this
    # bandwidth for data embedded in the task payload itself
    submit_latency: float = 0.05
    bandwidth: float = 10_000_000.0
    poll_interval: float = 0.01
    # stream benchmark
    duration: float = 8.0
    warmup: float = 2.0
    # memory benchmark
    rounds: int = 4
    output_size: int = 100_000
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def rate(self) -> float:
        """Producer rate: one item per compute worker per task time."""
        return (self.n - 1) / self.task_time

    def validate(self) -> None:
        modes = {
            "pipeline": PIPELINE_MODES,
            "stream": STREAM_MODES,
            "memory": MEMORY_MODES,
        }.get(self.benchmark)
        if modes is None:
            raise ValueError(f"unknown benchmark {self.benchmark!r}")
        if self.mode not in modes:
            raise ValueError(f"mode for {self.benchmark} must be one of {modes}, got {self.mode!r}")
        if self.backend not in BACKENDS:
            raise ValueError(f"backend must be one of {BACKENDS}, got {self.backend!r}")
        if self.n < 1:
            raise ValueError("n must be >= 1")
        if self.benchmark == "stream" and self.n < 2:
            raise ValueError("stream benchmark needs n >= 2 (producer plus workers)")
        if not 0.0 <= self.overhead_frac < 1.0:
            raise ValueError(f"overhead fraction must be in [0, 1), got {self.overhead_frac}")
        if self.task_time <= 0:
            raise ValueError("task time must be positive")
        if self.data_size < 0 or self.output_size < 0:
            raise ValueError("data sizes must be nonnegative")
        if self.benchmark == "stream" and self.warmup >= self.duration:
            raise ValueError("warmup must be shorter than duration")


def write_pipeline_csv(path: str | Path, records: Sequence[TaskRecord]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(PIPELINE_FIELDS)
        for rec in records:
            writer.writerow(
                [rec.task_id] + [f"{stamp:.6f}" for stamp in rec.phases()]
            )
    return path


def write_series_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path


def write_summary_json(path: str | Path, summary: dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def config_summary(config: BenchConfig) -> dict[str, Any]:
    raw = asdict(config)
    raw.pop("extra", None)
    return raw
