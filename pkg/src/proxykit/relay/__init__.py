from .client import RelayClient
from .core import DEFAULT_MAX_VALUE_BYTES, RelayCore, StoreStats
from .server import RelayServer

__all__ = ["DEFAULT_MAX_VALUE_BYTES", "RelayClient", "RelayCore", "RelayServer", "StoreStats"]
