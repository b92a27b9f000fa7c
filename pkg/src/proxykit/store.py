"""High-level store: serialize objects into a channel and mint lazy proxies.

A ``Factory`` is a self-contained recipe (key, store name, connector
config, serializer id) that can fetch and decode one target object with no
other context.  A ``Proxy`` wraps a factory and resolves just-in-time,
caching the value locally; serializing a proxy serializes only its
factory, so proxy bytes stay small no matter how large the target is.

Resolution prefers a registered store handle of the factory's store name
(sharing its connector, cache, and metrics); otherwise each resolve builds
a throwaway connector from the embedded config.  Proxying pays off for
objects larger than roughly 10 kB; below that the factory overhead can
exceed the payload, though nothing enforces a minimum.
"""

from __future__ import annotations

import threading
import time
from collections import OrderedDict
from dataclasses import dataclass
from typing import Any, Optional

from . import serial
from .connectors import Connector, ConnectorConfig, from_config
from .errors import ConfigError, DanglingReferenceError, FutureTimeoutError, SerializationError
from .keys import ObjectKey

RESOLVE_DIRECT = "direct"
RESOLVE_FUTURE = "future"
RESOLVE_STREAM = "stream"
RESOLVE_KINDS = (RESOLVE_DIRECT, RESOLVE_FUTURE, RESOLVE_STREAM)

DEFAULT_POLL_CAP = 0.1
_POLL_INITIAL = 0.001
DEFAULT_CACHE_SIZE = 16


@dataclass(frozen=True)
class Factory:
    """Serializable recipe for fetching and decoding one stored object."""

    key: ObjectKey
    store_name: str
    connector_config: ConnectorConfig
    serializer_id: str = "canonical"
    evict_on_resolve: bool = False
    resolve_kind: str = RESOLVE_DIRECT
    ref_kind: Optional[str] = None
    poll_interval: Optional[float] = None
    timeout: Optional[float] = None

    def to_map(self) -> dict[str, Any]:
        encoded: dict[str, Any] = {
            "key": str(self.key),
            "store": self.store_name,
            "connector": self.connector_config.to_text(),
            "serializer": self.serializer_id,
            "evict": self.evict_on_resolve,
            "kind": self.resolve_kind,
        }
        if self.ref_kind is not None:
            encoded["ref"] = self.ref_kind
        if self.poll_interval is not None:
            encoded["poll"] = float(self.poll_interval)
        if self.timeout is not None:
            encoded["timeout"] = float(self.timeout)
        return encoded

    @classmethod
    def from_map(cls, encoded: dict[str, Any]) -> "Factory":
        try:
            kind = encoded["kind"]
            if kind not in RESOLVE_KINDS:
                raise SerializationError(f"unknown resolve kind {kind!r}")
            return cls(
                key=ObjectKey.parse(encoded["key"]),
                store_name=encoded["store"],
                connector_config=ConnectorConfig.from_text(encoded["connector"]),
                serializer_id=encoded["serializer"],
                evict_on_resolve=bool(encoded["evict"]),
                resolve_kind=kind,
                ref_kind=encoded.get("ref"),
                poll_interval=encoded.get("poll"),
                timeout=encoded.get("timeout"),
            )
        except (KeyError, TypeError, ValueError, ConfigError) as exc:
            raise SerializationError(f"bad factory encoding: {exc}") from exc

    def to_bytes(self) -> bytes:
        return serial.dumps(self.to_map())

    @classmethod
    def from_bytes(cls, data: bytes) -> "Factory":
        decoded = serial.loads(data)
        if not isinstance(decoded, dict):
            raise SerializationError("factory encoding must be a map")
        return cls.from_map(decoded)


class Proxy:
    """Lazy reference: fetches and caches its target on first resolve."""

    __slots__ = ("factory", "_value", "_resolved")

    def __init__(self, factory: Factory):
        self.factory = factory
        self._value: Any = None
        self._resolved = False

    def is_resolved(self) -> bool:
        return self._resolved

    def resolve(self) -> Any:
        if not self._resolved:
            self._adopt(resolve_factory(self.factory))
        return self._value

    def _adopt(self, value: Any) -> None:
        self._value = value
        self._resolved = True

    def __repr__(self) -> str:
        state = "resolved" if self._resolved else "unresolved"
        return f"<{type(self).__name__} {self.factory.key} {state}>"

    # Copies share the factory and drop nothing; serialization (below)
    # deliberately drops the cached value instead.
    def __copy__(self) -> "Proxy":
        clone = type(self).__new__(type(self))
        clone.factory = self.factory
        clone._value = self._value
        clone._resolved = self._resolved
        return clone


def serialize_proxy(proxy: Proxy) -> bytes:
    """Encode only the factory; resolved state never travels."""
    return proxy.factory.to_bytes()


def deserialize_proxy(data: bytes) -> Proxy:
    return Proxy(Factory.from_bytes(data))


def materialize(obj: Any) -> Any:
    """Return the target for a proxy, or the object itself otherwise.

    Lets code accept either a value or a proxy of the value.
    """
    return obj.resolve() if isinstance(obj, Proxy) else obj


@dataclass
class StoreMetrics:
    puts: int = 0
    gets: int = 0
    cache_hits: int = 0
    evicts: int = 0
    bytes_put: int = 0
    bytes_gotten: int = 0


class _LRUCache:
    def __init__(self, capacity: int):
        self.capacity = capacity
        self._entries: OrderedDict[str, Any] = OrderedDict()
        self._lock = threading.Lock()

    def get(self, key: str) -> tuple[bool, Any]:
        with self._lock:
            if key not in self._entries:
                return False, None
            self._entries.move_to_end(key)
            return True, self._entries[key]

    def put(self, key: str, value: Any) -> None:
        if self.capacity <= 0:
            return
        with self._lock:
            self._entries[key] = value
            self._entries.move_to_end(key)
            while len(self._entries) > self.capacity:
                self._entries.popitem(last=False)

    def discard(self, key: str) -> None:
        with self._lock:
            self._entries.pop(key, None)


class Store:
    """Store handle: a name, a connector, a serializer, and a small cache.

    Handles are safe for concurrent use.  Two handles built from the same
    name and config observe the same object space.
    """

    def __init__(
        self,
        name: str,
        connector: Connector,
        *,
        serializer: str = "canonical",
        cache_size: int = DEFAULT_CACHE_SIZE,
    ):
        self.name = name
        self.connector = connector
        self.serializer_id = serializer
        self.metrics = StoreMetrics()
        self._cache = _LRUCache(cache_size)
        self._metrics_lock = threading.Lock()
        serial.get_serializer(serializer)  # fail fast on unknown ids

    # -- placement -------------------------------------------------------

    def put_object(self, value: Any) -> ObjectKey:
        data = self._dumps(value)
        key = ObjectKey.generate(self.name)
        self.connector.put(key, data)
        with self._metrics_lock:
            self.metrics.puts += 1
            self.metrics.bytes_put += len(data)
        return key

    def put_bytes(self, key: ObjectKey, data: bytes) -> None:
        """Raw overwrite of an existing slot (write-back path)."""
        self.connector.put(key, data)
        with self._metrics_lock:
            self.metrics.puts += 1
            self.metrics.bytes_put += len(data)
        self._cache.discard(str(key))

    def proxy(self, value: Any, evict_on_resolve: bool = False, lifetime=None) -> Proxy:
        key = self.put_object(value)
        if lifetime is not None:
            lifetime.attach(key)
        return Proxy(self.factory_for(key, evict_on_resolve=evict_on_resolve))

    def factory_for(
        self,
        key: ObjectKey,
        *,
        evict_on_resolve: bool = False,
        resolve_kind: str = RESOLVE_DIRECT,
        ref_kind: str | None = None,
        poll_interval: float | None = None,
        timeout: float | None = None,
    ) -> Factory:
        return Factory(
            key=key,
            store_name=self.name,
            connector_config=self.connector.config(),
            serializer_id=self.serializer_id,
            evict_on_resolve=evict_on_resolve,
            resolve_kind=resolve_kind,
            ref_kind=ref_kind,
            poll_interval=poll_interval,
            timeout=timeout,
        )

    def future(self, timeout: float | None = None, poll_interval: float = DEFAULT_POLL_CAP):
        from .futures import Future

        return Future(
            key=ObjectKey.generate(self.name),
            store_name=self.name,
            connector_config=self.connector.config(),
            serializer_id=self.serializer_id,
            poll_interval=poll_interval,
            timeout=timeout,
        )

    def owned_proxy(self, value: Any, lifetime=None):
        from .ownership import OwnedProxy

        key = self.put_object(value)
        if lifetime is not None:
            lifetime.attach(key)
        factory = self.factory_for(key, ref_kind="owned")
        return OwnedProxy(factory, lifetime=lifetime)

    # -- retrieval ---------------------------------------------------------

    def resolve(self, proxy: Proxy) -> Any:
        """Resolve through this handle (its connector, cache, and metrics)."""
        if not proxy.is_resolved():
            proxy._adopt(self.resolve_factory(proxy.factory))
        return proxy._value

    def resolve_factory(self, factory: Factory) -> Any:
        key_text = str(factory.key)
        use_cache = not factory.evict_on_resolve
        if use_cache:
            hit, value = self._cache.get(key_text)
            if hit:
                with self._metrics_lock:
                    self.metrics.cache_hits += 1
                return value
        data = _fetch_bytes(self.connector, factory, on_get=self._count_get)
        value = self._loads(data, factory.serializer_id)
        if use_cache:
            self._cache.put(key_text, value)
        return value

    def evict(self, key: ObjectKey) -> None:
        self.connector.evict(key)
        with self._metrics_lock:
            self.metrics.evicts += 1
        self._cache.discard(str(key))

    def exists(self, key: ObjectKey) -> bool:
        return self.connector.exists(key)

    def stats(self):
        return self.connector.stats()

    # -- plumbing -----------------------------------------------------------

    def _count_get(self, data: bytes) -> None:
        with self._metrics_lock:
            self.metrics.gets += 1
            self.metrics.bytes_gotten += len(data)

    def _dumps(self, value: Any) -> bytes:
        serializer = serial.get_serializer(self.serializer_id)
        try:
            return serializer.dumps(value)
        except SerializationError:
            raise
        except Exception as exc:
            raise SerializationError(f"cannot serialize {type(value).__name__}: {exc}") from exc

    def _loads(self, data: bytes, serializer_id: str) -> Any:
        serializer = serial.get_serializer(serializer_id)
        try:
            return serializer.loads(data)
        except SerializationError:
            raise
        except Exception as exc:
            raise SerializationError(f"cannot deserialize: {exc}") from exc

    def close(self) -> None:
        close = getattr(self.connector, "close", None)
        if close is not None:
            close()

    def __enter__(self) -> "Store":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def __repr__(self) -> str:
        return f"<Store {self.name!r} via {self.connector.config().to_text()}>"


# -- registry ----------------------------------------------------------------

_STORES: dict[str, Store] = {}
_STORES_LOCK = threading.Lock()


def register_store(store: Store) -> Store:
    with _STORES_LOCK:
        if store.name in _STORES:
            raise ConfigError(f"a store named {store.name!r} is already registered")
        _STORES[store.name] = store
    return store


def lookup_store(name: str) -> Store | None:
    with _STORES_LOCK:
        return _STORES.get(name)


def unregister_store(name: str) -> None:
    with _STORES_LOCK:
        _STORES.pop(name, None)


def clear_store_registry() -> None:
    with _STORES_LOCK:
        _STORES.clear()


# -- standalone resolution -----------------------------------------------------


def resolve_factory(factory: Factory) -> Any:
    """Resolve via the registered store of the factory's name, or from scratch.

    The fallback path builds a fresh connector from the embedded config, so
    a factory is resolvable in a process that never constructed a store.
    """
    store = lookup_store(factory.store_name)
    if store is not None:
        return store.resolve_factory(factory)
    connector = from_config(factory.connector_config)
    try:
        data = _fetch_bytes(connector, factory)
        serializer = serial.get_serializer(factory.serializer_id)
        return serializer.loads(data)
    finally:
        close = getattr(connector, "close", None)
        if close is not None:
            close()


def evict_factory_target(factory: Factory) -> None:
    """Remove the stored target without resolving it."""
    store = lookup_store(factory.store_name)
    if store is not None:
        store.evict(factory.key)
        return
    connector = from_config(factory.connector_config)
    try:
        connector.evict(factory.key)
    finally:
        close = getattr(connector, "close", None)
        if close is not None:
            close()


def read_factory_bytes(factory: Factory) -> bytes:
    """Fetch the raw stored bytes for a factory's key (no deserialization)."""
    store = lookup_store(factory.store_name)
    connector = store.connector if store is not None else from_config(factory.connector_config)
    try:
        data = connector.get(factory.key)
        if data is None:
            raise DanglingReferenceError(f"no stored value for {factory.key}")
        return data
    finally:
        if store is None:
            close = getattr(connector, "close", None)
            if close is not None:
                close()


def write_factory_bytes(factory: Factory, data: bytes, key: ObjectKey | None = None) -> None:
    """Write raw bytes to a factory's slot (or an explicit key in its space)."""
    target = key if key is not None else factory.key
    store = lookup_store(factory.store_name)
    if store is not None:
        store.put_bytes(target, data)
        return
    connector = from_config(factory.connector_config)
    try:
        connector.put(target, data)
    finally:
        close = getattr(connector, "close", None)
        if close is not None:
            close()


def factory_target_exists(factory: Factory) -> bool:
    store = lookup_store(factory.store_name)
    if store is not None:
        return store.exists(factory.key)
    connector = from_config(factory.connector_config)
    try:
        return connector.exists(factory.key)
    finally:
        close = getattr(connector, "close", None)
        if close is not None:
            close()


def _fetch_bytes(connector: Connector, factory: Factory, on_get=None) -> bytes:
    if factory.resolve_kind == RESOLVE_FUTURE:
        data = poll_for_bytes(
            connector,
            factory.key,
            poll_cap=factory.poll_interval or DEFAULT_POLL_CAP,
            timeout=factory.timeout,
        )
    else:
        data = connector.get(factory.key)
        if data is None:
            raise DanglingReferenceError(f"no stored value for {factory.key}")
    if on_get is not None:
        on_get(data)
    if factory.evict_on_resolve:
        connector.evict(factory.key)
    return data


def poll_for_bytes(
    connector: Connector,
    key: ObjectKey,
    *,
    poll_cap: float = DEFAULT_POLL_CAP,
    timeout: float | None = None,
) -> bytes:
    """Wait for a slot to be filled: poll exists() with exponential backoff.

    Backoff starts at 1 ms, doubles, and is capped at ``poll_cap``.  A slot
    that was observed and then vanished raises DanglingReferenceError; an
    expired wait raises FutureTimeoutError.
    """
    deadline = None if timeout is None else time.monotonic() + timeout
    delay = _POLL_INITIAL
    while True:
        if connector.exists(key):
            data = connector.get(key)
            if data is None:
                raise DanglingReferenceError(f"result slot {key} was evicted mid-wait")
            return data
        if deadline is not None:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                raise FutureTimeoutError(f"no result in slot {key} after {timeout}s")
            time.sleep(min(delay, remaining))
        else:
            time.sleep(delay)
        delay = min(delay * 2, poll_cap)
