"""Write-once distributed result slots.

A ``Future`` names an empty slot in a store.  ``set_result`` fills it
exactly once; proxies minted from the future block on resolution until the
slot is filled, polling the channel with exponential backoff.  Futures and
their proxies are plain data plus a connector config, so they can be
serialized and handed to any process that can reach the channel — no
in-process signaling is involved.

Write-once is enforced by an exists-check before the put.  Two setters
racing from different processes can in principle both pass the check;
without channel-side compare-and-set enforcement is best-effort, and the
contract is a single producer per future.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Optional

from . import serial, store as store_mod
from .connectors import ConnectorConfig, from_config
from .errors import AlreadySetError, SerializationError
from .keys import ObjectKey
from .store import DEFAULT_POLL_CAP, Factory, Proxy, RESOLVE_FUTURE

_UNSET = object()


@dataclass
class Future:
    key: ObjectKey
    store_name: str
    connector_config: ConnectorConfig
    serializer_id: str = "canonical"
    poll_interval: float = DEFAULT_POLL_CAP
    timeout: Optional[float] = None

    def set_result(self, value: Any) -> None:
        serializer = serial.get_serializer(self.serializer_id)
        try:
            data = serializer.dumps(value)
        except SerializationError:
            raise
        except Exception as exc:
            raise SerializationError(f"cannot serialize result: {exc}") from exc
        registered = store_mod.lookup_store(self.store_name)
        if registered is not None:
            if registered.exists(self.key):
                raise AlreadySetError(f"result slot {self.key} is already set")
            registered.put_bytes(self.key, data)
            return
        connector = self._connector()
        if connector.exists(self.key):
            raise AlreadySetError(f"result slot {self.key} is already set")
        connector.put(self.key, data)

    def proxy(self) -> Proxy:
        return Proxy(self.to_factory())

    def result(self, timeout: Any = _UNSET) -> Any:
        """Block until the slot is set and return the value directly."""
        effective = self.timeout if timeout is _UNSET else timeout
        registered = store_mod.lookup_store(self.store_name)
        connector = registered.connector if registered is not None else self._connector()
        data = store_mod.poll_for_bytes(
            connector, self.key, poll_cap=self.poll_interval, timeout=effective
        )
        return serial.get_serializer(self.serializer_id).loads(data)

    def done(self) -> bool:
        registered = store_mod.lookup_store(self.store_name)
        if registered is not None:
            return registered.exists(self.key)
        return self._connector().exists(self.key)

    def to_factory(self) -> Factory:
        return Factory(
            key=self.key,
            store_name=self.store_name,
            connector_config=self.connector_config,
            serializer_id=self.serializer_id,
            resolve_kind=RESOLVE_FUTURE,
            poll_interval=self.poll_interval,
            timeout=self.timeout,
        )

    def to_bytes(self) -> bytes:
        return self.to_factory().to_bytes()

    @classmethod
    def from_factory(cls, factory: Factory) -> "Future":
        if factory.resolve_kind != RESOLVE_FUTURE:
            raise SerializationError(
                f"expected a future factory, got resolve kind {factory.resolve_kind!r}"
            )
        return cls(
            key=factory.key,
            store_name=factory.store_name,
            connector_config=factory.connector_config,
            serializer_id=factory.serializer_id,
            poll_interval=factory.poll_interval or DEFAULT_POLL_CAP,
            timeout=factory.timeout,
        )

    @classmethod
    def from_bytes(cls, data: bytes) -> "Future":
        return cls.from_factory(Factory.from_bytes(data))

    def _connector(self):
        cached = getattr(self, "_connector_cache", None)
        if cached is None:
            cached = from_config(self.connector_config)
            self._connector_cache = cached
        return cached
