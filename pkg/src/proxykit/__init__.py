"""Lazy object proxies over mediated channels, plus the patterns built on
them: distributed futures, metadata-decoupled streaming, and
ownership-based object lifetimes."""

from . import errors
from .connectors import (
    ConnectorConfig,
    FileConnector,
    MemoryConnector,
    RelayConnector,
    from_config,
    memory_space,
    to_config,
)
from .executor import LocalEngine, TaskExecutor, TaskFuture
from .futures import Future
from .keys import ObjectKey
from .lifetimes import ContextLifetime, LeaseLifetime, StaticLifetime
from .ownership import (
    OwnedProxy,
    RefMutProxy,
    RefProxy,
    clone_owned,
    end,
    into_owned,
    make_ref,
    make_ref_mut,
    release,
    update,
)
from .relay import RelayClient, RelayCore, RelayServer, StoreStats
from .store import (
    Factory,
    Proxy,
    Store,
    clear_store_registry,
    deserialize_proxy,
    lookup_store,
    materialize,
    register_store,
    serialize_proxy,
    unregister_store,
)
from .streaming import StreamConsumer, StreamEvent, StreamItem, StreamProducer

__version__ = "0.1.0"

__all__ = [
    "ConnectorConfig",
    "ContextLifetime",
    "Factory",
    "FileConnector",
    "Future",
    "LeaseLifetime",
    "LocalEngine",
    "MemoryConnector",
    "ObjectKey",
    "OwnedProxy",
    "Proxy",
    "RefMutProxy",
    "RefProxy",
    "RelayClient",
    "RelayConnector",
    "RelayCore",
    "RelayServer",
    "StaticLifetime",
    "Store",
    "StoreStats",
    "StreamConsumer",
    "StreamEvent",
    "StreamItem",
    "StreamProducer",
    "TaskExecutor",
    "TaskFuture",
    "clear_store_registry",
    "clone_owned",
    "deserialize_proxy",
    "end",
    "errors",
    "from_config",
    "into_owned",
    "lookup_store",
    "make_ref",
    "make_ref_mut",
    "materialize",
    "memory_space",
    "register_store",
    "release",
    "serialize_proxy",
    "to_config",
    "unregister_store",
    "update",
]
