"""TCP client speaking the relay wire protocol.

A client is safe to use from one thread at a time; use one connection per
concurrent caller.  A NEXT with no timeout blocks the connection until a
message arrives, so subscribers should hold their own client.
"""

from __future__ import annotations

import socket
import threading

from ..errors import (
    CapacityError,
    ProtocolError,
    ProxyKitError,
    TopicClosedError,
    TransportError,
)
from . import protocol as wire
from .core import StoreStats


class RelayClient:
    def __init__(self, host: str, port: int, connect_timeout: float = 10.0) -> None:
        self.host = host
        self.port = port
        try:
            self._sock = socket.create_connection((host, port), timeout=connect_timeout)
        except OSError as exc:
            raise TransportError(f"cannot connect to relay at {host}:{port}: {exc}") from exc
        self._sock.settimeout(None)
        self._rfile = self._sock.makefile("rb")
        self._wfile = self._sock.makefile("wb")
        self._lock = threading.Lock()

    # -- key-value -----------------------------------------------------

    def put(self, key: str, value: bytes) -> None:
        self._expect_ok(wire.OP_PUT, key.encode("utf-8"), value)

    def get(self, key: str) -> bytes | None:
        status, payload = self._request(wire.OP_GET, key.encode("utf-8"))
        if status == wire.ST_NOT_FOUND:
            return None
        self._check(status, payload, wire.OP_GET)
        return payload

    def exists(self, key: str) -> bool:
        status, payload = self._request(wire.OP_EXISTS, key.encode("utf-8"))
        if status == wire.ST_NOT_FOUND:
            return False
        self._check(status, payload, wire.OP_EXISTS)
        return True

    def evict(self, key: str) -> None:
        self._expect_ok(wire.OP_EVICT, key.encode("utf-8"))

    def stats(self) -> StoreStats:
        status, payload = self._request(wire.OP_STATS, b"")
        self._check(status, payload, wire.OP_STATS)
        return wire.unpack_stats(payload)

    # -- topics ---------------------------------------------------------

    def publish(self, topic: str, message: bytes) -> None:
        self._expect_ok(wire.OP_PUBLISH, topic.encode("utf-8"), message)

    def subscribe(self, topic: str) -> str:
        status, payload = self._request(wire.OP_SUBSCRIBE, topic.encode("utf-8"))
        self._check(status, payload, wire.OP_SUBSCRIBE)
        return payload.decode("ascii")

    def next(self, handle: str, timeout: float | None = None) -> bytes:
        status, payload = self._request(
            wire.OP_NEXT, handle.encode("utf-8"), wire.pack_timeout(timeout)
        )
        if status == wire.ST_TIMEOUT:
            raise TimeoutError(f"no message within {timeout}s")
        if status == wire.ST_END_OF_STREAM:
            raise TopicClosedError(handle)
        self._check(status, payload, wire.OP_NEXT)
        return payload

    def close_topic(self, topic: str) -> None:
        self._expect_ok(wire.OP_CLOSE, topic.encode("utf-8"))

    # -- plumbing --------------------------------------------------------

    def _request(self, opcode: int, key: bytes, value: bytes = b"") -> tuple[int, bytes]:
        frame = wire.pack_request(opcode, key, value)
        with self._lock:
            try:
                self._wfile.write(frame)
                self._wfile.flush()
                return wire.read_response(self._rfile)
            except ProxyKitError:
                raise
            except OSError as exc:
                raise TransportError(f"relay connection failed: {exc}") from exc

    def _expect_ok(self, opcode: int, key: bytes, value: bytes = b"") -> None:
        status, payload = self._request(opcode, key, value)
        self._check(status, payload, opcode)

    def _check(self, status: int, payload: bytes, opcode: int) -> None:
        if status == wire.ST_OK:
            return
        name = wire.OPCODES.get(opcode, hex(opcode))
        if status == wire.ST_ERROR:
            code, message = wire.unpack_error(payload)
            if code == "capacity":
                raise CapacityError(message)
            if code == "protocol":
                raise ProtocolError(message)
            raise TransportError(f"{name} failed: {message}")
        raise ProtocolError(f"unexpected status 0x{status:02x} for {name}")

    def close(self) -> None:
        with self._lock:
            for closer in (self._rfile.close, self._wfile.close, self._sock.close):
                try:
                    closer()
                except OSError:
                    pass

    def __enter__(self) -> "RelayClient":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()
