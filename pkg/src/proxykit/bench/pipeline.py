"""Pipeline benchmark: a chain of n tasks, each feeding the next.

Each task sleeps through a startup-overhead fraction of its task time,
resolves its input, sleeps through the remaining compute time, and then
produces ``data_size`` bytes for its successor.

Modes:

* ``no_proxy``      — sequential; the payload rides through the engine on
                      submit, paying the engine bandwidth cost.
* ``proxy``         — sequential; the payload goes through the store and
                      only a lightweight proxy rides the engine.
* ``proxy_future``  — every task is submitted up front; neighbors share a
                      result-slot/proxy pair, so a task's startup overhead
                      overlaps its predecessor's compute.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from ..executor import LocalEngine
from ..store import Store, register_store, serialize_proxy, unregister_store
from .backends import open_backend
from .records import BenchConfig, TaskRecord
from .schedule import makespan as schedule_makespan
from .schedule import simulate_pipeline_config


@dataclass
class PipelineRun:
    mode: str
    records: list[TaskRecord]
    makespan: float
    bytes_put: int
    bytes_gotten: int
    simulated: bool = False


def run_pipeline(config: BenchConfig) -> PipelineRun:
    config.validate()
    if config.simulated_clock:
        records = simulate_pipeline_config(config)
        return PipelineRun(
            mode=config.mode,
            records=records,
            makespan=schedule_makespan(records),
            bytes_put=config.n * config.data_size,
            bytes_gotten=config.n * config.data_size,
            simulated=True,
        )
    with open_backend(config) as backend:
        store_name = f"bench-pipeline-{backend.run_id}"
        store = Store(store_name, backend.new_connector())
        register_store(store)
        try:
            runner = _WallClockPipeline(config, store)
            records = runner.run()
        finally:
            unregister_store(store_name)
            store.close()
    return PipelineRun(
        mode=config.mode,
        records=records,
        makespan=max(r.result_received for r in records) - min(r.submit for r in records),
        bytes_put=store.metrics.bytes_put,
        bytes_gotten=store.metrics.bytes_gotten,
    )


class _WallClockPipeline:
    def __init__(self, config: BenchConfig, store: Store):
        self.config = config
        self.store = store
        self.payload = random.Random(config.seed).randbytes(config.data_size)
        self.records = [TaskRecord(task_id=i) for i in range(config.n)]
        self.t0 = 0.0

    def now(self) -> float:
        return time.monotonic() - self.t0

    def run(self) -> list[TaskRecord]:
        cfg = self.config
        engine = LocalEngine(
            workers=cfg.n, submit_latency=cfg.submit_latency, bandwidth=cfg.bandwidth
        )
        try:
            self.t0 = time.monotonic()
            if cfg.mode == "no_proxy":
                self._run_no_proxy(engine)
            elif cfg.mode == "proxy":
                self._run_proxy(engine)
            else:
                self._run_proxy_future(engine)
        finally:
            engine.shutdown()
        return self.records

    # -- sequential, payload through the engine ---------------------------

    def _run_no_proxy(self, engine: LocalEngine) -> None:
        cfg = self.config
        previous: bytes | None = None
        for i in range(cfg.n):
            rec = self.records[i]
            rec.submit = self.now()
            fut = engine.submit(
                self._task_no_proxy, i, previous, payload_bytes=len(previous or b"")
            )
            output = fut.result()
            # The client receives the full payload back through the engine.
            if cfg.bandwidth:
                time.sleep(len(output) / cfg.bandwidth)
            rec.result_received = self.now()
            previous = output

    def _task_no_proxy(self, i: int, payload: bytes | None) -> bytes:
        cfg = self.config
        rec = self.records[i]
        rec.start = self.now()
        time.sleep(cfg.overhead_frac * cfg.task_time)
        rec.overhead_done = self.now()
        rec.bytes_in = len(payload or b"")
        rec.input_resolved = self.now()
        time.sleep((1.0 - cfg.overhead_frac) * cfg.task_time)
        rec.compute_done = self.now()
        rec.bytes_out = len(self.payload)
        return self.payload

    # -- sequential, payload through the store -----------------------------

    def _run_proxy(self, engine: LocalEngine) -> None:
        cfg = self.config
        previous = None
        for i in range(cfg.n):
            rec = self.records[i]
            rec.submit = self.now()
            size = len(serialize_proxy(previous)) if previous is not None else 0
            fut = engine.submit(self._task_proxy, i, previous, payload_bytes=size)
            previous = fut.result()
            rec.result_received = self.now()
        # The client consumes the final task's output.
        self.store.resolve(previous)

    def _task_proxy(self, i: int, in_proxy):
        cfg = self.config
        rec = self.records[i]
        rec.start = self.now()
        time.sleep(cfg.overhead_frac * cfg.task_time)
        rec.overhead_done = self.now()
        if in_proxy is not None:
            rec.bytes_in = len(in_proxy.resolve())
        rec.input_resolved = self.now()
        time.sleep((1.0 - cfg.overhead_frac) * cfg.task_time)
        rec.compute_done = self.now()
        rec.bytes_out = len(self.payload)
        return self.store.proxy(self.payload)

    # -- pipelined via shared result slots ---------------------------------

    def _run_proxy_future(self, engine: LocalEngine) -> None:
        cfg = self.config
        slots = [self.store.future(poll_interval=cfg.poll_interval) for _ in range(cfg.n)]
        task_futs = []
        for i in range(cfg.n):
            rec = self.records[i]
            in_proxy = slots[i - 1].proxy() if i > 0 else None
            size = len(serialize_proxy(in_proxy)) if in_proxy is not None else 0
            rec.submit = self.now()
            fut = engine.submit(
                self._task_proxy_future, i, in_proxy, slots[i], payload_bytes=size
            )
            fut.add_done_callback(
                lambda _f, rec=rec: setattr(rec, "result_received", self.now())
            )
            task_futs.append(fut)
        for fut in task_futs:
            fut.result()
        self.store.resolve(slots[-1].proxy())

    def _task_proxy_future(self, i: int, in_proxy, out_slot) -> None:
        cfg = self.config
        rec = self.records[i]
        rec.start = self.now()
        time.sleep(cfg.overhead_frac * cfg.task_time)
        rec.overhead_done = self.now()
        if in_proxy is not None:
            rec.bytes_in = len(in_proxy.resolve())
        rec.input_resolved = self.now()
        time.sleep((1.0 - cfg.overhead_frac) * cfg.task_time)
        rec.compute_done = self.now()
        rec.bytes_out = len(self.payload)
        out_slot.set_result(self.payload)
