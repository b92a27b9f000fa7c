"""Memory benchmark: repeated map-reduce rounds, three cleanup policies.

Each round creates one input block per mapper; every mapper resolves its
input, sleeps, and produces a smaller output; one reducer consumes all
mapper outputs.  The store's live-object count is sampled on a fixed
interval throughout.

* ``default``   — objects are proxied and never freed; the count only grows.
* ``manual``    — the client evicts inputs after the mappers finish and
                  outputs after the reducer finishes.
* ``ownership`` — inputs and outputs are owned proxies handed to tasks via
                  the executor shim; eviction happens automatically as each
                  transferred owner's task completes.

Evictions are recorded as (round, role) labels so cleanup policies can be
compared as event sequences.
"""

from __future__ import annotations

import random
import threading
import time
from dataclasses import dataclass

from ..executor import LocalEngine, TaskExecutor
from ..store import Store, materialize, register_store, unregister_store
from .backends import open_backend
from .records import BenchConfig

ROLE_INPUT = "mapper_input"
ROLE_OUTPUT = "mapper_output"

SAMPLE_INTERVAL = 0.1


class RecordingConnector:
    """Connector wrapper logging evictions of labeled keys."""

    def __init__(self, inner):
        self.inner = inner
        self._labels: dict[str, tuple] = {}
        self._events: list[tuple[float, tuple]] = []
        self._lock = threading.Lock()

    def label(self, key, label: tuple) -> None:
        with self._lock:
            self._labels[str(key)] = label

    @property
    def events(self) -> list[tuple[float, tuple]]:
        with self._lock:
            return list(self._events)

    def put(self, key, value):
        return self.inner.put(key, value)

    def get(self, key):
        return self.inner.get(key)

    def exists(self, key):
        return self.inner.exists(key)

    def evict(self, key):
        self.inner.evict(key)
        with self._lock:
            label = self._labels.pop(str(key), None)
            if label is not None:
                self._events.append((time.monotonic(), label))

    def stats(self):
        return self.inner.stats()

    def config(self):
        return self.inner.config()

    def close(self):
        close = getattr(self.inner, "close", None)
        if close is not None:
            close()


@dataclass
class MemoryRun:
    mode: str
    series: list[tuple[float, int, int]]
    trace: list[tuple[int, str]]
    objects_created: int
    final_object_count: int
    final_total_bytes: int
    simulated: bool = False


def run_memory(config: BenchConfig) -> MemoryRun:
    config.validate()
    if config.simulated_clock:
        return _simulate_memory(config)
    mappers = config.n
    in_payload = random.Random(config.seed).randbytes(config.data_size)
    out_payload = random.Random(config.seed + 1).randbytes(config.output_size)

    with open_backend(config) as backend:
        connector = RecordingConnector(backend.new_connector())
        store_name = f"bench-memory-{backend.run_id}"
        store = Store(store_name, connector, cache_size=0)
        register_store(store)
        engine = LocalEngine(workers=mappers, submit_latency=config.submit_latency)
        sampler = _Sampler(connector)
        sampler.start()
        try:
            if config.mode == "default":
                created = _rounds_default(config, store, engine, connector, in_payload, out_payload)
            elif config.mode == "manual":
                created = _rounds_manual(config, store, engine, connector, in_payload, out_payload)
            else:
                created = _rounds_ownership(
                    config, store, engine, connector, in_payload, out_payload
                )
        finally:
            sampler.stop()
            engine.shutdown()
            unregister_store(store_name)
            store.close()
        stats = connector.stats()
    return MemoryRun(
        mode=config.mode,
        series=sampler.series,
        trace=[label for _, label in connector.events],
        objects_created=created,
        final_object_count=stats.object_count,
        final_total_bytes=stats.total_bytes,
    )


class _Sampler:
    def __init__(self, connector: RecordingConnector, interval: float = SAMPLE_INTERVAL):
        self.connector = connector
        self.interval = interval
        self.series: list[tuple[float, int, int]] = []
        self._stop = threading.Event()
        self._thread = threading.Thread(target=self._run, name="stats-sampler", daemon=True)
        self._t0 = time.monotonic()

    def start(self) -> None:
        self._thread.start()

    def _run(self) -> None:
        while not self._stop.is_set():
            stats = self.connector.stats()
            self.series.append(
                (time.monotonic() - self._t0, stats.object_count, stats.total_bytes)
            )
            self._stop.wait(self.interval)

    def stop(self) -> None:
        stats = self.connector.stats()
        self.series.append((time.monotonic() - self._t0, stats.object_count, stats.total_bytes))
        self._stop.set()
        self._thread.join(timeout=5)


def _mapper_plain(store: Store, in_proxy, out_payload: bytes, task_time: float):
    materialize(in_proxy)
    time.sleep(task_time)
    return store.proxy(out_payload)


def _reducer_plain(outputs, task_time: float) -> int:
    total = sum(len(materialize(proxy)) for proxy in outputs)
    time.sleep(task_time)
    return total


def _rounds_default(config, store, engine, connector, in_payload, out_payload) -> int:
    created = 0
    for round_index in range(config.rounds):
        inputs = []
        for _ in range(config.n):
            proxy = store.proxy(in_payload)
            connector.label(proxy.factory.key, (round_index, ROLE_INPUT))
            inputs.append(proxy)
            created += 1
        futs = [
            engine.submit(_mapper_plain, store, proxy, out_payload, config.task_time)
            for proxy in inputs
        ]
        outputs = [fut.result() for fut in futs]
        for proxy in outputs:
            connector.label(proxy.factory.key, (round_index, ROLE_OUTPUT))
            created += 1
        engine.submit(_reducer_plain, outputs, config.task_time).result()
    return created


def _rounds_manual(config, store, engine, connector, in_payload, out_payload) -> int:
    created = 0
    for round_index in range(config.rounds):
        inputs = []
        for _ in range(config.n):
            proxy = store.proxy(in_payload)
            connector.label(proxy.factory.key, (round_index, ROLE_INPUT))
            inputs.append(proxy)
            created += 1
        futs = [
            engine.submit(_mapper_plain, store, proxy, out_payload, config.task_time)
            for proxy in inputs
        ]
        outputs = [fut.result() for fut in futs]
        for proxy in inputs:
            store.evict(proxy.factory.key)
        for proxy in outputs:
            connector.label(proxy.factory.key, (round_index, ROLE_OUTPUT))
            created += 1
        engine.submit(_reducer_plain, outputs, config.task_time).result()
        for proxy in outputs:
            store.evict(proxy.factory.key)
    return created


def _mapper_owned(store: Store, owner, out_payload: bytes, task_time: float):
    owner.resolve()
    time.sleep(task_time)
    return store.owned_proxy(out_payload)


def _reducer_owned(outputs, task_time: float) -> int:
    total = sum(len(owner.resolve()) for owner in outputs)
    time.sleep(task_time)
    return total


def _rounds_ownership(config, store, engine, connector, in_payload, out_payload) -> int:
    shim = TaskExecutor(engine)
    created = 0
    for round_index in range(config.rounds):
        inputs = []
        for _ in range(config.n):
            owner = store.owned_proxy(in_payload)
            connector.label(owner.factory.key, (round_index, ROLE_INPUT))
            inputs.append(owner)
            created += 1
        futs = [
            shim.submit(_mapper_owned, store, owner, out_payload, config.task_time)
            for owner in inputs
        ]
        outputs = [fut.result() for fut in futs]
        for owner in outputs:
            connector.label(owner.factory.key, (round_index, ROLE_OUTPUT))
            created += 1
        shim.submit(_reducer_owned, outputs, config.task_time).result()
    return created


def _simulate_memory(config: BenchConfig) -> MemoryRun:
    """Deterministic timeline replay of creates and evictions."""
    mappers = config.n
    map_phase = mappers * config.submit_latency + config.task_time
    reduce_phase = config.submit_latency + config.task_time
    round_time = map_phase + reduce_phase
    creates: list[tuple[float, int]] = []
    evicts: list[tuple[float, tuple[int, str]]] = []
    for r in range(config.rounds):
        t_round = r * round_time
        creates.append((t_round, mappers))  # inputs
        creates.append((t_round + map_phase, mappers))  # outputs
        if config.mode in ("manual", "ownership"):
            for _ in range(mappers):
                evicts.append((t_round + map_phase, (r, ROLE_INPUT)))
            for _ in range(mappers):
                evicts.append((t_round + round_time, (r, ROLE_OUTPUT)))
    total_time = config.rounds * round_time
    series = []
    t = 0.0
    while t <= total_time + SAMPLE_INTERVAL:
        count = sum(n for at, n in creates if at <= t) - sum(1 for at, _ in evicts if at <= t)
        series.append((round(t, 3), count, 0))
        t += SAMPLE_INTERVAL
    evicts.sort(key=lambda item: item[0])
    created = config.rounds * mappers * 2
    final = 0 if config.mode in ("manual", "ownership") else created
    return MemoryRun(
        mode=config.mode,
        series=series,
        trace=[label for _, label in evicts],
        objects_created=created,
        final_object_count=final,
        final_total_bytes=0,
        simulated=True,
    )
