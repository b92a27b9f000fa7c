"""Topic streaming with bulk payloads decoupled from event metadata.

The producer stores each payload in a per-topic store and publishes a
small event record (topic, payload factory, user metadata, sequence
number) to the broker.  Consumers iterate over *unresolved* proxies, so no
bulk data moves through the consuming process until a proxy is resolved —
typically in a worker the proxy was forwarded to.

Events travel as the canonical encoding of a list of event maps (a batch;
size 1 unless batching is configured).  Each event map has the keys
"topic", "factory", "meta", "seq", "kind"; close events carry a null
factory.  Payloads default to evict-on-resolve so a stream consumed once
cleans up after itself; pass ``evict_on_resolve=False`` when fanning out,
and note that with multiple consumers of an evicting stream the first
resolver wins and later resolvers see a dangling reference.
"""

from __future__ import annotations

import random
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Mapping, NamedTuple, Optional, Protocol

from .errors import MalformedEventError, SerializationError, TopicClosedError, UnmappedTopicError
from . import serial
from .store import Factory, Proxy, RESOLVE_STREAM, Store, evict_factory_target

EVENT_ITEM = "item"
EVENT_CLOSE = "close"

MetadataFilter = Callable[[dict[str, str]], bool]


class EventBroker(Protocol):
    """Publish/subscribe surface required from a broker (relay core or client)."""

    def publish(self, topic: str, message: bytes) -> None: ...

    def subscribe(self, topic: str) -> str: ...

    def next(self, handle: str, timeout: float | None = None) -> bytes: ...

    def close_topic(self, topic: str) -> None: ...


@dataclass(frozen=True)
class StreamEvent:
    topic: str
    factory: Optional[Factory]
    meta: dict[str, str] = field(default_factory=dict)
    seq: int = 0
    kind: str = EVENT_ITEM

    def to_map(self) -> dict[str, Any]:
        return {
            "topic": self.topic,
            "factory": self.factory.to_map() if self.factory is not None else None,
            "meta": dict(self.meta),
            "seq": self.seq,
            "kind": self.kind,
        }

    @classmethod
    def from_map(cls, encoded: Any) -> "StreamEvent":
        if not isinstance(encoded, dict):
            raise MalformedEventError(f"event must be a map, got {type(encoded).__name__}")
        try:
            kind = encoded["kind"]
            if kind not in (EVENT_ITEM, EVENT_CLOSE):
                raise MalformedEventError(f"unknown event kind {kind!r}")
            raw_factory = encoded["factory"]
            factory = Factory.from_map(raw_factory) if raw_factory is not None else None
            if kind == EVENT_ITEM and factory is None:
                raise MalformedEventError("item event is missing its factory")
            meta = encoded["meta"]
            if not isinstance(meta, dict) or not all(
                isinstance(v, str) for v in meta.values()
            ):
                raise MalformedEventError("event metadata must be a string map")
            return cls(
                topic=encoded["topic"],
                factory=factory,
                meta=meta,
                seq=int(encoded["seq"]),
                kind=kind,
            )
        except MalformedEventError:
            raise
        except (KeyError, TypeError, ValueError, SerializationError) as exc:
            raise MalformedEventError(f"bad event encoding: {exc}") from exc


def encode_batch(events: list[StreamEvent]) -> bytes:
    return serial.dumps([event.to_map() for event in events])


def decode_batch(data: bytes) -> list[StreamEvent]:
    try:
        decoded = serial.loads(data)
    except SerializationError as exc:
        raise MalformedEventError(f"cannot decode event batch: {exc}") from exc
    if not isinstance(decoded, list):
        raise MalformedEventError("event batch must be a list")
    return [StreamEvent.from_map(entry) for entry in decoded]


class StreamProducer:
    """Sends payloads to per-topic stores and publishes event batches.

    One producer per thread; multiple producers may share a topic, each
    with its own sequence numbering.
    """

    def __init__(
        self,
        broker: EventBroker,
        stores: Mapping[str, Store],
        *,
        batch_size: int = 1,
        filter: MetadataFilter | None = None,
    ):
        if batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        self.broker = broker
        self.stores = dict(stores)
        self.batch_size = batch_size
        self.filter = filter
        self._seq: dict[str, int] = {}
        self._pending: dict[str, list[StreamEvent]] = {}
        self._closed: set[str] = set()

    def send(
        self,
        topic: str,
        value: Any,
        metadata: Mapping[str, str] | None = None,
        evict_on_resolve: bool = True,
    ) -> None:
        store = self.stores.get(topic)
        if store is None:
            raise UnmappedTopicError(f"topic {topic!r} has no store mapping")
        if topic in self._closed:
            raise TopicClosedError(f"producer already closed topic {topic!r}")
        meta = dict(metadata or {})
        if self.filter is not None and not self.filter(meta):
            return  # dropped before any storage or publish
        key = store.put_object(value)
        factory = store.factory_for(
            key, evict_on_resolve=evict_on_resolve, resolve_kind=RESOLVE_STREAM
        )
        event = StreamEvent(topic, factory, meta, self._next_seq(topic), EVENT_ITEM)
        pending = self._pending.setdefault(topic, [])
        pending.append(event)
        if len(pending) >= self.batch_size:
            self.flush(topic)

    def flush(self, topic: str) -> None:
        pending = self._pending.get(topic)
        if pending:
            self.broker.publish(topic, encode_batch(pending))
            self._pending[topic] = []

    def close(self, topic: str) -> None:
        """Flush buffered events and publish the end-of-stream event."""
        if topic not in self.stores:
            raise UnmappedTopicError(f"topic {topic!r} has no store mapping")
        if topic in self._closed:
            return
        self.flush(topic)
        close_event = StreamEvent(topic, None, {}, self._next_seq(topic), EVENT_CLOSE)
        self.broker.publish(topic, encode_batch([close_event]))
        self._closed.add(topic)

    def close_all(self) -> None:
        for topic in self.stores:
            self.close(topic)

    def _next_seq(self, topic: str) -> int:
        seq = self._seq.get(topic, 0)
        self._seq[topic] = seq + 1
        return seq

    def __enter__(self) -> "StreamProducer":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close_all()


class StreamItem(NamedTuple):
    proxy: Proxy
    metadata: dict[str, str]


class StreamConsumer:
    """Iterates a topic, yielding unresolved proxies plus metadata.

    ``filter`` and ``sample`` install plugins that skip events before they
    are surfaced; skipped payloads are evicted so evict-on-resolve streams
    do not leak them.
    """

    def __init__(self, broker: EventBroker, topic: str):
        self.broker = broker
        self.topic = topic
        self._handle = broker.subscribe(topic)
        self._pending: list[StreamEvent] = []
        self._ended = False
        self._filter: MetadataFilter | None = None
        self._sample_rate: float | None = None
        self._rng = random.Random()
        self._bytes_received = 0
        self._lock = threading.Lock()

    def filter(self, predicate: MetadataFilter) -> "StreamConsumer":
        self._filter = predicate
        return self

    def sample(self, rate: float, seed: int | None = None) -> "StreamConsumer":
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"sample rate must be in [0, 1], got {rate}")
        self._sample_rate = rate
        self._rng = random.Random(seed)
        return self

    @property
    def bytes_received(self) -> int:
        """Total event-message bytes pulled off the broker so far."""
        return self._bytes_received

    def next(self, timeout: float | None = None) -> StreamItem:
        with self._lock:
            while True:
                if self._ended:
                    raise TopicClosedError(self.topic)
                event = self._next_event(timeout)
                if event.kind == EVENT_CLOSE:
                    self._ended = True
                    raise TopicClosedError(self.topic)
                if not self._keep(event):
                    self._discard(event)
                    continue
                assert event.factory is not None
                return StreamItem(Proxy(event.factory), dict(event.meta))

    def _next_event(self, timeout: float | None) -> StreamEvent:
        while not self._pending:
            message = self.broker.next(self._handle, timeout)
            self._bytes_received += len(message)
            self._pending.extend(decode_batch(message))
        return self._pending.pop(0)

    def _keep(self, event: StreamEvent) -> bool:
        if self._filter is not None and not self._filter(event.meta):
            return False
        if self._sample_rate is not None and not self._rng.random() < self._sample_rate:
            return False
        return True

    def _discard(self, event: StreamEvent) -> None:
        if event.factory is not None:
            evict_factory_target(event.factory)

    def __iter__(self) -> Iterator[StreamItem]:
        return self

    def __next__(self) -> StreamItem:
        try:
            return self.next()
        except TopicClosedError:
            raise StopIteration from None
