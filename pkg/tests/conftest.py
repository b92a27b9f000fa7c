import uuid

import pytest

from proxykit.connectors import (
    FileConnector,
    MemoryConnector,
    RelayConnector,
    reset_memory_spaces,
)
from proxykit.relay.server import RelayServer
from proxykit.store import clear_store_registry


@pytest.fixture(autouse=True)
def _clean_registries():
    yield
    clear_store_registry()
    reset_memory_spaces()


@pytest.fixture
def fresh_relay():
    server = RelayServer().start()
    yield server
    server.stop()


@pytest.fixture(params=["memory", "file", "relay"])
def backend_name(request):
    return request.param


@pytest.fixture
def make_connector(backend_name, tmp_path):
    """Factory for connectors that all observe one fresh key space."""
    if backend_name == "memory":
        space = f"test-{uuid.uuid4().hex[:8]}"
        yield lambda: MemoryConnector(space)
        return
    if backend_name == "file":
        directory = tmp_path / "store"
        yield lambda: FileConnector(directory)
        return
    server = RelayServer().start()
    host, port = server.address
    connectors = []

    def make():
        connector = RelayConnector(host, port)
        connectors.append(connector)
        return connector

    yield make
    for connector in connectors:
        connector.close()
    server.stop()
