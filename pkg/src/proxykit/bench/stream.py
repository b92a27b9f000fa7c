"""Stream benchmark: one producer, one dispatcher, a pool of workers.

The producer publishes ``data_size``-byte items at one item per compute
worker per task time.  The dispatcher consumes the stream and submits one
sleep task per item.  In ``direct`` mode the payload itself travels
through the dispatcher and the engine; in ``proxystream`` mode only event
metadata reaches the dispatcher and workers resolve payload proxies
straight from the store.
"""

from __future__ import annotations

import math
import random
import threading
import time
from dataclasses import dataclass, field

from ..errors import TopicClosedError
from ..executor import LocalEngine
from ..store import Store, register_store, serialize_proxy, unregister_store
from ..streaming import StreamConsumer, StreamProducer
from .backends import open_backend
from .records import BenchConfig

_EVENT_SIZE_ESTIMATE = 256


@dataclass
class StreamRun:
    mode: str
    throughput: float
    ceiling: float
    items_sent: int
    tasks_completed: int
    dispatcher_bulk_bytes: int
    payload_bytes_total: int
    worker_bytes_gotten: int
    series: list[tuple[int, int]] = field(default_factory=list)
    simulated: bool = False


def run_stream(config: BenchConfig) -> StreamRun:
    config.validate()
    if config.simulated_clock:
        return _simulate_stream(config)
    workers = config.n - 1
    rate = config.rate
    items = max(1, math.floor(rate * config.duration))
    payload = random.Random(config.seed).randbytes(config.data_size)
    completions: list[float] = []
    completions_lock = threading.Lock()

    with open_backend(config) as backend:
        topic = f"bench-stream-{backend.run_id}"
        store_name = f"bench-stream-{backend.run_id}"
        worker_store = Store(store_name, backend.new_connector())
        register_store(worker_store)
        producer_store = Store(store_name, backend.new_connector())
        engine = LocalEngine(
            workers=workers, submit_latency=config.submit_latency, bandwidth=config.bandwidth
        )
        try:
            if config.mode == "direct":
                run = _run_direct(
                    config, backend, engine, topic, payload, items, rate,
                    completions, completions_lock,
                )
            else:
                run = _run_proxystream(
                    config, backend, engine, topic, payload, items, rate,
                    producer_store, completions, completions_lock,
                )
        finally:
            engine.shutdown()
            unregister_store(store_name)
            worker_store.close()
            producer_store.close()
    run.worker_bytes_gotten = worker_store.metrics.bytes_gotten
    return run


def _pace(t0: float, index: int, rate: float) -> None:
    target = t0 + index / rate
    delay = target - time.monotonic()
    if delay > 0:
        time.sleep(delay)


def _run_direct(config, backend, engine, topic, payload, items, rate, completions, lock):
    subscriber = backend.new_broker()
    handle = subscriber.subscribe(topic)
    publisher = backend.new_broker()
    t0 = time.monotonic()

    def produce() -> None:
        for i in range(items):
            _pace(t0, i, rate)
            publisher.publish(topic, payload)
        publisher.close_topic(topic)

    producer_thread = threading.Thread(target=produce, name="stream-producer", daemon=True)
    producer_thread.start()

    def work(raw: bytes) -> None:
        time.sleep(config.task_time)
        with lock:
            completions.append(time.monotonic() - t0)

    bulk_bytes = 0
    task_futs = []
    while True:
        try:
            raw = subscriber.next(handle, timeout=30.0)
        except TopicClosedError:
            break
        bulk_bytes += len(raw)
        task_futs.append(engine.submit(work, raw, payload_bytes=len(raw)))
    producer_thread.join()
    for fut in task_futs:
        fut.result()
    return _finish(config, items, completions, bulk_bytes)


def _run_proxystream(
    config, backend, engine, topic, payload, items, rate, producer_store, completions, lock
):
    consumer = StreamConsumer(backend.new_broker(), topic)
    producer = StreamProducer(backend.new_broker(), {topic: producer_store})
    t0 = time.monotonic()

    def produce() -> None:
        for i in range(items):
            _pace(t0, i, rate)
            producer.send(topic, payload, {"index": str(i)})
        producer.close(topic)

    producer_thread = threading.Thread(target=produce, name="stream-producer", daemon=True)
    producer_thread.start()

    def work(proxy) -> None:
        proxy.resolve()
        time.sleep(config.task_time)
        with lock:
            completions.append(time.monotonic() - t0)

    task_futs = []
    while True:
        try:
            item = consumer.next(timeout=30.0)
        except TopicClosedError:
            break
        task_futs.append(
            engine.submit(work, item.proxy, payload_bytes=len(serialize_proxy(item.proxy)))
        )
    producer_thread.join()
    for fut in task_futs:
        fut.result()
    return _finish(config, items, completions, consumer.bytes_received)


def _finish(config: BenchConfig, items: int, completions: list[float], bulk_bytes: int) -> StreamRun:
    window = [t for t in completions if config.warmup <= t < config.duration]
    span = config.duration - config.warmup
    throughput = len(window) / span if span > 0 else 0.0
    last = max(completions) if completions else 0.0
    series = []
    for second in range(int(math.ceil(last)) + 1):
        count = sum(1 for t in completions if second <= t < second + 1)
        series.append((second, count))
    return StreamRun(
        mode=config.mode,
        throughput=throughput,
        ceiling=config.rate,
        items_sent=items,
        tasks_completed=len(completions),
        dispatcher_bulk_bytes=bulk_bytes,
        payload_bytes_total=items * config.data_size,
        worker_bytes_gotten=0,
        series=series,
    )


def _simulate_stream(config: BenchConfig) -> StreamRun:
    """Closed-form replay: dispatcher cost per item bounds the service rate."""
    workers = config.n - 1
    rate = config.rate
    items = max(1, math.floor(rate * config.duration))
    if config.mode == "direct":
        per_item = config.submit_latency + (
            config.data_size / config.bandwidth if config.bandwidth else 0.0
        )
        bulk = items * config.data_size
    else:
        per_item = config.submit_latency + (
            _EVENT_SIZE_ESTIMATE / config.bandwidth if config.bandwidth else 0.0
        )
        bulk = items * _EVENT_SIZE_ESTIMATE
    service = min(rate, 1.0 / per_item if per_item > 0 else rate, workers / config.task_time)
    horizon = int(math.ceil(config.duration + config.task_time)) + 1
    series = []
    completed = 0
    for second in range(horizon):
        expected = 0
        if second + 1 > config.task_time:
            expected = min(items, int(service * (second + 1 - config.task_time)))
        series.append((second, expected - completed))
        completed = expected
    return StreamRun(
        mode=config.mode,
        throughput=service,
        ceiling=rate,
        items_sent=items,
        tasks_completed=completed,
        dispatcher_bulk_bytes=bulk,
        payload_bytes_total=items * config.data_size,
        worker_bytes_gotten=0 if config.mode == "direct" else items * config.data_size,
        series=series,
        simulated=True,
    )
