"""Backend wiring shared by the benchmark runners.

``--backend`` picks the mediated channel for bulk payloads: an in-process
memory space, a directory of files, or a relay server spawned for the run.
Event messages always travel through an in-process core for memory/file
backends and through dedicated relay connections for the relay backend
(one per role, since a blocking NEXT occupies its connection).
"""

from __future__ import annotations

import contextlib
import tempfile
import uuid
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterator

from ..connectors import Connector, FileConnector, MemoryConnector, memory_space
from ..relay.client import RelayClient
from ..relay.core import RelayCore
from ..relay.server import RelayServer
from .records import BenchConfig


@dataclass
class BenchBackend:
    kind: str
    run_id: str
    new_connector: Callable[[], Connector]
    new_broker: Callable[[], object]


@contextlib.contextmanager
def open_backend(config: BenchConfig) -> Iterator[BenchBackend]:
    run_id = uuid.uuid4().hex[:8]
    if config.backend == "memory":
        space = f"bench-{run_id}"
        memory_space(space)
        yield BenchBackend(
            kind="memory",
            run_id=run_id,
            new_connector=lambda: MemoryConnector(space),
            new_broker=lambda: memory_space(space),
        )
        return
    if config.backend == "file":
        base = Path(config.out_dir) if config.out_dir else Path(tempfile.gettempdir())
        directory = base / f"bench-filestore-{run_id}"
        broker_core = RelayCore()
        yield BenchBackend(
            kind="file",
            run_id=run_id,
            new_connector=lambda: FileConnector(directory),
            new_broker=lambda: broker_core,
        )
        return
    if config.backend == "relay":
        server = RelayServer().start()
        host, port = server.address
        clients: list[RelayClient] = []

        def new_client() -> RelayClient:
            client = RelayClient(host, port)
            clients.append(client)
            return client

        try:
            yield BenchBackend(
                kind="relay",
                run_id=run_id,
                new_connector=lambda: _relay_connector(host, port, clients),
                new_broker=new_client,
            )
        finally:
            for client in clients:
                client.close()
            server.stop()
        return
    raise ValueError(f"unknown backend {config.backend!r}")


def _relay_connector(host: str, port: int, clients: list[RelayClient]):
    from ..connectors import RelayConnector

    connector = RelayConnector(host, port)
    clients.append(connector.client)
    return connector
