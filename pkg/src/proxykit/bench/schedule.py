"""Deterministic schedule replay for the pipeline benchmark.

Computes idealized phase timestamps under zero transfer cost, with only
the engine's fixed per-submit latency modeled.  Sequential modes submit
task i after task i-1's result arrives; the pipelined mode submits every
task up front and lets task i's input wait on task i-1's compute finishing.

This replay is both the ``--simulated-clock`` implementation and the
reference against which wall-clock runs are judged.
"""

from __future__ import annotations

from .records import BenchConfig, TaskRecord

SEQUENTIAL = "sequential"
PIPELINED = "pipelined"

_SCHEDULES = {
    "no_proxy": SEQUENTIAL,
    "proxy": SEQUENTIAL,
    "proxy_future": PIPELINED,
}


def schedule_kind(mode: str) -> str:
    try:
        return _SCHEDULES[mode]
    except KeyError:
        raise ValueError(f"unknown pipeline mode {mode!r}") from None


def simulate_pipeline(
    n: int,
    task_time: float,
    overhead_frac: float,
    submit_latency: float,
    kind: str = SEQUENTIAL,
    data_size: int = 0,
) -> list[TaskRecord]:
    overhead = overhead_frac * task_time
    compute = (1.0 - overhead_frac) * task_time
    records = []
    prev_done = 0.0
    for i in range(n):
        rec = TaskRecord(task_id=i, bytes_in=data_size if i > 0 else 0, bytes_out=data_size)
        if kind == SEQUENTIAL:
            rec.submit = prev_done
        else:
            rec.submit = i * submit_latency
        rec.start = rec.submit + submit_latency
        rec.overhead_done = rec.start + overhead
        if kind == SEQUENTIAL or i == 0:
            rec.input_resolved = rec.overhead_done
        else:
            rec.input_resolved = max(rec.overhead_done, prev_done)
        rec.compute_done = rec.input_resolved + compute
        rec.result_received = rec.compute_done
        prev_done = rec.compute_done
        records.append(rec)
    return records


def simulate_pipeline_config(config: BenchConfig) -> list[TaskRecord]:
    return simulate_pipeline(
        n=config.n,
        task_time=config.task_time,
        overhead_frac=config.overhead_frac,
        submit_latency=config.submit_latency,
        kind=schedule_kind(config.mode),
        data_size=config.data_size,
    )


def makespan(records: list[TaskRecord]) -> float:
    return max(r.result_received for r in records) - min(r.submit for r in records)


def ideal_reduction(n: int, task_time: float, overhead_frac: float, submit_latency: float) -> float:
    """Fractional makespan reduction of the pipelined schedule vs sequential."""
    seq = makespan(simulate_pipeline(n, task_time, overhead_frac, submit_latency, SEQUENTIAL))
    pipe = makespan(simulate_pipeline(n, task_time, overhead_frac, submit_latency, PIPELINED))
    return 1.0 - pipe / seq
