"""A local task engine and the reference-managing submit shim.

``LocalEngine`` is a thread-pool engine with a configurable synchronous
submit cost: each submit sleeps ``submit_latency`` plus
``payload_bytes / bandwidth`` before the task is enqueued, modeling the
client-side cost of shipping task payloads through an engine.  Its futures
run completion callbacks *before* waking waiters, so anything a callback
does (releasing references, evicting objects) is visible to a client that
was blocking on the result.

``TaskExecutor`` wraps an engine and manages ownership for task
arguments: shared/mutable references passed to a task are released when
the task completes, and an owner passed to a task transfers ownership to
it — the owner is ended (its object evicted) on completion.  Only one
in-flight task may hold a given mutable reference.
"""

from __future__ import annotations

import logging
import queue
import threading
import time
from typing import Any, Callable

from .errors import OwnershipRuleError
from .ownership import OwnedProxy, RefMutProxy, RefProxy, end

log = logging.getLogger(__name__)


class TaskFuture:
    """Engine-completion handle; callbacks fire before waiters wake."""

    def __init__(self) -> None:
        self._event = threading.Event()
        self._lock = threading.Lock()
        self._callbacks: list[Callable[["TaskFuture"], None]] = []
        self._result: Any = None
        self._exception: BaseException | None = None

    def set_result(self, value: Any) -> None:
        self._result = value
        self._finish()

    def set_exception(self, exc: BaseException) -> None:
        self._exception = exc
        self._finish()

    def _finish(self) -> None:
        with self._lock:
            callbacks, self._callbacks = self._callbacks, []
        for callback in callbacks:
            try:
                callback(self)
            except Exception:
                log.exception("task completion callback failed")
        self._event.set()

    def add_done_callback(self, callback: Callable[["TaskFuture"], None]) -> None:
        with self._lock:
            if not self._event.is_set():
                self._callbacks.append(callback)
                return
        callback(self)

    def done(self) -> bool:
        return self._event.is_set()

    def result(self, timeout: float | None = None) -> Any:
        if not self._event.wait(timeout):
            raise TimeoutError("task did not complete in time")
        if self._exception is not None:
            raise self._exception
        return self._result

    def exception(self, timeout: float | None = None) -> BaseException | None:
        if not self._event.wait(timeout):
            raise TimeoutError("task did not complete in time")
        return self._exception


class LocalEngine:
    """Thread-pool engine with a modeled synchronous submit cost."""

    def __init__(
        self,
        workers: int,
        *,
        submit_latency: float = 0.05,
        bandwidth: float | None = None,
    ):
        if workers < 1:
            raise ValueError("workers must be >= 1")
        self.submit_latency = submit_latency
        self.bandwidth = bandwidth
        self._queue: queue.SimpleQueue = queue.SimpleQueue()
        self._threads = [
            threading.Thread(target=self._worker, name=f"engine-worker-{i}", daemon=True)
            for i in range(workers)
        ]
        for thread in self._threads:
            thread.start()

    def submit(self, fn: Callable, *args: Any, payload_bytes: int = 0, **kwargs: Any) -> TaskFuture:
        cost = self.submit_latency
        if self.bandwidth and payload_bytes:
            cost += payload_bytes / self.bandwidth
        if cost > 0:
            time.sleep(cost)
        future = TaskFuture()
        self._queue.put((fn, args, kwargs, future))
        return future

    def _worker(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            fn, args, kwargs, future = item
            try:
                future.set_result(fn(*args, **kwargs))
            except BaseException as exc:  # noqa: BLE001 - reported via the future
                future.set_exception(exc)

    def shutdown(self) -> None:
        for _ in self._threads:
            self._queue.put(None)
        for thread in self._threads:
            thread.join(timeout=5)

    def __enter__(self) -> "LocalEngine":
        return self

    def __exit__(self, *exc_info) -> None:
        self.shutdown()


def scan_proxies(arguments: Any, depth: int = 2) -> list[OwnedProxy | RefProxy | RefMutProxy]:
    """Collect ownership-typed proxies from args, one container level deep."""
    found: list[OwnedProxy | RefProxy | RefMutProxy] = []
    seen: set[int] = set()

    def visit(obj: Any, remaining: int) -> None:
        if isinstance(obj, (OwnedProxy, RefProxy, RefMutProxy)):
            if id(obj) not in seen:
                seen.add(id(obj))
                found.append(obj)
            return
        if remaining <= 0:
            return
        if isinstance(obj, (list, tuple)):
            for item in obj:
                visit(item, remaining - 1)
        elif isinstance(obj, dict):
            for item in obj.values():
                visit(item, remaining - 1)

    visit(arguments, depth + 1)
    return found


class TaskExecutor:
    """Submit shim tying reference lifetimes to task completion.

    Works with any engine whose ``submit`` returns a future exposing
    ``add_done_callback``; completion-before-wakeup ordering is guaranteed
    when the engine is a LocalEngine.
    """

    def __init__(self, engine: LocalEngine):
        self.engine = engine
        self._lock = threading.Lock()
        # id(ref) -> [ref, in-flight task count]; keeps refs alive until released
        self._inflight: dict[int, list] = {}

    def submit(self, fn: Callable, *args: Any, **kwargs: Any) -> TaskFuture:
        proxies = scan_proxies([list(args), kwargs])
        refs = [p for p in proxies if isinstance(p, (RefProxy, RefMutProxy))]
        owners = [p for p in proxies if isinstance(p, OwnedProxy)]
        with self._lock:
            for ref in refs:
                entry = self._inflight.get(id(ref))
                if isinstance(ref, RefMutProxy) and entry is not None and entry[1] > 0:
                    raise OwnershipRuleError(
                        "a task holding this mutable reference is already in flight"
                    )
            for ref in refs:
                entry = self._inflight.setdefault(id(ref), [ref, 0])
                entry[1] += 1
        future = self.engine.submit(fn, *args, **kwargs)
        future.add_done_callback(lambda _fut: self._on_complete(refs, owners))
        return future

    def _on_complete(self, refs, owners) -> None:
        with self._lock:
            to_release = []
            for ref in refs:
                entry = self._inflight.get(id(ref))
                if entry is None:
                    continue
                entry[1] -= 1
                if entry[1] <= 0:
                    del self._inflight[id(ref)]
                    to_release.append(ref)
        for ref in to_release:
            try:
                ref.release()
            except Exception:
                log.exception("failed to release task reference")
        for owner in owners:
            try:
                end(owner)
            except Exception:
                log.exception("failed to end transferred owner")
