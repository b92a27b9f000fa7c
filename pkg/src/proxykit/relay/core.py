"""In-process key-value + topic state backing the relay service.

The TCP server is a thin framing layer over this class, so tests and the
memory backend exercise the exact same operation contract in-process.

Delivery contract for topics: a subscriber receives only messages
published after it subscribed (connected-subscriber broadcast).  There is
no retention or redelivery; closing a topic is final.
"""

from __future__ import annotations

import itertools
import queue
import threading
from dataclasses import dataclass

from ..errors import CapacityError, ProtocolError, TopicClosedError

DEFAULT_MAX_VALUE_BYTES = 512 * 1024 * 1024
MAX_TOPIC_BYTES = 255

_CLOSE_MARKER = object()


@dataclass(frozen=True)
class StoreStats:
    object_count: int = 0
    total_bytes: int = 0
    put_count: int = 0
    get_count: int = 0
    evict_count: int = 0


class _Topic:
    __slots__ = ("queues", "closed")

    def __init__(self) -> None:
        self.queues: list[queue.SimpleQueue] = []
        self.closed = False


class _Subscription:
    __slots__ = ("topic", "queue", "ended")

    def __init__(self, topic: str) -> None:
        self.topic = topic
        self.queue: queue.SimpleQueue = queue.SimpleQueue()
        self.ended = False


def _check_topic(topic: str) -> None:
    if not topic:
        raise ProtocolError("topic must be nonempty")
    if len(topic.encode("utf-8")) > MAX_TOPIC_BYTES:
        raise ProtocolError(f"topic exceeds {MAX_TOPIC_BYTES} UTF-8 bytes")


class RelayCore:
    """Thread-safe store and broker state; one instance per service."""

    def __init__(self, max_value_bytes: int = DEFAULT_MAX_VALUE_BYTES) -> None:
        self.max_value_bytes = max_value_bytes
        self._lock = threading.Lock()
        self._data: dict[str, bytes] = {}
        self._total_bytes = 0
        self._put_count = 0
        self._get_count = 0
        self._evict_count = 0
        self._topics: dict[str, _Topic] = {}
        self._subs: dict[str, _Subscription] = {}
        self._sub_ids = itertools.count(1)

    # -- key-value -----------------------------------------------------

    def put(self, key: str, value: bytes) -> None:
        if len(value) > self.max_value_bytes:
            raise CapacityError(
                f"value of {len(value)} bytes exceeds limit {self.max_value_bytes}"
            )
        with self._lock:
            old = self._data.get(key)
            if old is not None:
                self._total_bytes -= len(old)
            self._data[key] = value
            self._total_bytes += len(value)
            self._put_count += 1

    def get(self, key: str) -> bytes | None:
        with self._lock:
            self._get_count += 1
            return self._data.get(key)

    def exists(self, key: str) -> bool:
        with self._lock:
            return key in self._data

    def evict(self, key: str) -> None:
        with self._lock:
            old = self._data.pop(key, None)
            if old is not None:
                self._total_bytes -= len(old)
                self._evict_count += 1

    def stats(self) -> StoreStats:
        with self._lock:
            return StoreStats(
                object_count=len(self._data),
                total_bytes=self._total_bytes,
                put_count=self._put_count,
                get_count=self._get_count,
                evict_count=self._evict_count,
            )

    def keys(self) -> list[str]:
        """Snapshot of live keys; maintenance/test aid, not a wire op."""
        with self._lock:
            return list(self._data)

    # -- topics ---------------------------------------------------------

    def publish(self, topic: str, message: bytes) -> None:
        _check_topic(topic)
        with self._lock:
            entry = self._topics.get(topic)
            if entry is None or entry.closed:
                # No connected subscribers (or stream over): message is dropped.
                return
            for q in entry.queues:
                q.put(message)

    def subscribe(self, topic: str) -> str:
        _check_topic(topic)
        with self._lock:
            sub = _Subscription(topic)
            entry = self._topics.setdefault(topic, _Topic())
            entry.queues.append(sub.queue)
            if entry.closed:
                sub.queue.put(_CLOSE_MARKER)
            handle = str(next(self._sub_ids))
            self._subs[handle] = sub
            return handle

    def next(self, handle: str, timeout: float | None = None) -> bytes:
        with self._lock:
            sub = self._subs.get(handle)
        if sub is None:
            raise ProtocolError(f"unknown subscription handle {handle!r}")
        if sub.ended:
            raise TopicClosedError(sub.topic)
        try:
            message = sub.queue.get(timeout=timeout) if timeout is not None else sub.queue.get()
        except queue.Empty:
            raise TimeoutError(f"no message on {sub.topic!r} within {timeout}s") from None
        if message is _CLOSE_MARKER:
            sub.ended = True
            raise TopicClosedError(sub.topic)
        return message

    def close_topic(self, topic: str) -> None:
        _check_topic(topic)
        with self._lock:
            entry = self._topics.setdefault(topic, _Topic())
            if entry.closed:
                return
            entry.closed = True
            for q in entry.queues:
                q.put(_CLOSE_MARKER)
