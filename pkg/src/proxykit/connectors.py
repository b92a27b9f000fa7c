"""Uniform low-level interface to mediated channels.

A connector stores opaque byte values under ObjectKeys.  Three backends:

* ``memory`` — a named in-process space; only meaningful within a single
  process (two connectors on the same space name share state).
* ``file`` — one file per key inside a directory, named by the key's text
  form; writes go through a temp file + atomic rename so readers never see
  a partial value.
* ``relay`` — a client of the self-hosted relay service.

Connector configs serialize to ``kind=<kind>;k1=v1;k2=v2`` with parameter
keys sorted, and reconstruct a connector observing the same key space.
The value-size cap is a deployment setting, not part of the key-space
identity, so it is not carried in configs.
"""

from __future__ import annotations

import os
import tempfile
import threading
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Protocol, runtime_checkable

from .errors import CapacityError, ConfigError
from .keys import ObjectKey
from .relay.client import RelayClient
from .relay.core import DEFAULT_MAX_VALUE_BYTES, RelayCore, StoreStats

CONNECTOR_KINDS = ("memory", "file", "relay")


@dataclass
class ConnectorConfig:
    kind: str
    params: dict[str, str] = field(default_factory=dict)

    def to_text(self) -> str:
        if self.kind not in CONNECTOR_KINDS:
            raise ConfigError(f"unknown connector kind {self.kind!r}")
        parts = [f"kind={self.kind}"]
        for key in sorted(self.params):
            value = self.params[key]
            if ";" in key or "=" in key or ";" in value:
                raise ConfigError(f"config field {key}={value!r} contains a reserved character")
            parts.append(f"{key}={value}")
        return ";".join(parts)

    @classmethod
    def from_text(cls, text: str) -> "ConnectorConfig":
        segments = text.split(";")
        head, sep, kind = segments[0].partition("=")
        if head != "kind" or not sep:
            raise ConfigError(f"config text must start with 'kind=', got {text!r}")
        params: dict[str, str] = {}
        for segment in segments[1:]:
            key, sep, value = segment.partition("=")
            if not sep or not key:
                raise ConfigError(f"bad config segment {segment!r}")
            params[key] = value
        return cls(kind, params)


@runtime_checkable
class Connector(Protocol):
    def put(self, key: ObjectKey, value: bytes) -> None: ...

    def get(self, key: ObjectKey) -> bytes | None: ...

    def exists(self, key: ObjectKey) -> bool: ...

    def evict(self, key: ObjectKey) -> None: ...

    def stats(self) -> StoreStats: ...

    def config(self) -> ConnectorConfig: ...


# -- memory ------------------------------------------------------------

_SPACES: dict[str, RelayCore] = {}
_SPACES_LOCK = threading.Lock()


def memory_space(name: str, max_value_bytes: int = DEFAULT_MAX_VALUE_BYTES) -> RelayCore:
    """Get or create the named in-process space (KV store plus topics)."""
    with _SPACES_LOCK:
        core = _SPACES.get(name)
        if core is None:
            core = RelayCore(max_value_bytes=max_value_bytes)
            _SPACES[name] = core
        return core


def reset_memory_spaces() -> None:
    """Drop all named spaces; test isolation aid."""
    with _SPACES_LOCK:
        _SPACES.clear()


class MemoryConnector:
    def __init__(self, space: str | None = None, max_value_bytes: int = DEFAULT_MAX_VALUE_BYTES):
        self.space = space if space is not None else uuid.uuid4().hex
        self._core = memory_space(self.space, max_value_bytes)

    @property
    def core(self) -> RelayCore:
        return self._core

    def put(self, key: ObjectKey, value: bytes) -> None:
        self._core.put(str(key), bytes(value))

    def get(self, key: ObjectKey) -> bytes | None:
        return self._core.get(str(key))

    def exists(self, key: ObjectKey) -> bool:
        return self._core.exists(str(key))

    def evict(self, key: ObjectKey) -> None:
        self._core.evict(str(key))

    def stats(self) -> StoreStats:
        return self._core.stats()

    def config(self) -> ConnectorConfig:
        return ConnectorConfig("memory", {"space": self.space})

    def close(self) -> None:
        pass


# -- file ---------------------------------------------------------------

class FileConnector:
    """One file per key; key text is the file name.

    object_count/total_bytes reflect the directory contents, so they are
    shared between connectors on the same directory; the op counters are
    local to each connector instance.
    """

    _TMP_PREFIX = ".tmp-"

    def __init__(self, directory: str | os.PathLike, max_value_bytes: int = DEFAULT_MAX_VALUE_BYTES):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        self.max_value_bytes = max_value_bytes
        self._lock = threading.Lock()
        self._put_count = 0
        self._get_count = 0
        self._evict_count = 0

    def _path(self, key: ObjectKey) -> Path:
        return self.directory / str(key)

    def put(self, key: ObjectKey, value: bytes) -> None:
        if len(value) > self.max_value_bytes:
            raise CapacityError(f"value of {len(value)} bytes exceeds limit {self.max_value_bytes}")
        fd, tmp_name = tempfile.mkstemp(prefix=self._TMP_PREFIX, dir=self.directory)
        try:
            with os.fdopen(fd, "wb") as handle:
                handle.write(value)
            os.replace(tmp_name, self._path(key))
        except BaseException:
            try:
                os.unlink(tmp_name)
            except FileNotFoundError:
                pass
            raise
        with self._lock:
            self._put_count += 1

    def get(self, key: ObjectKey) -> bytes | None:
        with self._lock:
            self._get_count += 1
        try:
            return self._path(key).read_bytes()
        except FileNotFoundError:
            return None

    def exists(self, key: ObjectKey) -> bool:
        return self._path(key).exists()

    def evict(self, key: ObjectKey) -> None:
        try:
            os.unlink(self._path(key))
        except FileNotFoundError:
            return
        with self._lock:
            self._evict_count += 1

    def stats(self) -> StoreStats:
        count = 0
        total = 0
        for entry in self.directory.iterdir():
            if entry.name.startswith(self._TMP_PREFIX) or not entry.is_file():
                continue
            try:
                size = entry.stat().st_size
            except FileNotFoundError:  # evicted between listing and stat
                continue
            count += 1
            total += size
        with self._lock:
            return StoreStats(
                object_count=count,
                total_bytes=total,
                put_count=self._put_count,
                get_count=self._get_count,
                evict_count=self._evict_count,
            )

    def config(self) -> ConnectorConfig:
        return ConnectorConfig("file", {"dir": str(self.directory)})

    def close(self) -> None:
        pass


# -- relay ---------------------------------------------------------------

class RelayConnector:
    def __init__(self, host: str, port: int):
        self.host = host
        self.port = int(port)
        self._client = RelayClient(self.host, self.port)

    @property
    def client(self) -> RelayClient:
        return self._client

    def put(self, key: ObjectKey, value: bytes) -> None:
        self._client.put(str(key), bytes(value))

    def get(self, key: ObjectKey) -> bytes | None:
        return self._client.get(str(key))

    def exists(self, key: ObjectKey) -> bool:
        return self._client.exists(str(key))

    def evict(self, key: ObjectKey) -> None:
        self._client.evict(str(key))

    def stats(self) -> StoreStats:
        return self._client.stats()

    def config(self) -> ConnectorConfig:
        return ConnectorConfig("relay", {"host": self.host, "port": str(self.port)})

    def close(self) -> None:
        self._client.close()


def to_config(connector: Connector) -> ConnectorConfig:
    return connector.config()


def from_config(config: ConnectorConfig | str) -> Connector:
    if isinstance(config, str):
        config = ConnectorConfig.from_text(config)
    if config.kind == "memory":
        space = config.params.get("space")
        if not space:
            raise ConfigError("memory config requires a 'space' parameter")
        return MemoryConnector(space)
    if config.kind == "file":
        directory = config.params.get("dir")
        if not directory:
            raise ConfigError("file config requires a 'dir' parameter")
        return FileConnector(directory)
    if config.kind == "relay":
        host = config.params.get("host")
        port = config.params.get("port")
        if not host or not port:
            raise ConfigError("relay config requires 'host' and 'port' parameters")
        try:
            port_num = int(port)
        except ValueError:
            raise ConfigError(f"relay port must be an integer, got {port!r}") from None
        return RelayConnector(host, port_num)
    raise ConfigError(f"unknown connector kind {config.kind!r}")
