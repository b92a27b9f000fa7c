"""Threaded TCP server exposing a RelayCore over the binary wire protocol."""

from __future__ import annotations

import logging
import socketserver
import threading

from ..errors import CapacityError, ProtocolError, ProxyKitError, TopicClosedError, TransportError
from . import protocol as wire
from .core import RelayCore

log = logging.getLogger(__name__)


class _Handler(socketserver.StreamRequestHandler):
    def handle(self) -> None:
        core: RelayCore = self.server.core  # type: ignore[attr-defined]
        peer = self.client_address
        log.debug("connection from %s", peer)
        while True:
            try:
                request = wire.read_request(self.rfile, core.max_value_bytes)
            except TransportError:
                break
            except (CapacityError, ProtocolError) as exc:
                self._respond(wire.ST_ERROR, wire.pack_error(_code_for(exc), str(exc)))
                break
            if request is None:
                break
            opcode, key, value = request
            try:
                status, payload = self._dispatch(core, opcode, key, value)
            except ProxyKitError as exc:
                status, payload = wire.ST_ERROR, wire.pack_error(_code_for(exc), str(exc))
            except Exception as exc:  # noqa: BLE001 - keep the server alive
                log.exception("internal error handling %s", wire.OPCODES.get(opcode, opcode))
                status, payload = wire.ST_ERROR, wire.pack_error("internal", str(exc))
            try:
                self._respond(status, payload)
            except (BrokenPipeError, ConnectionResetError, OSError):
                break
        log.debug("connection from %s closed", peer)

    def _respond(self, status: int, payload: bytes) -> None:
        self.wfile.write(wire.pack_response(status, payload))
        self.wfile.flush()

    def _dispatch(
        self, core: RelayCore, opcode: int, key: bytes, value: bytes
    ) -> tuple[int, bytes]:
        text = _decode_key(key)
        if opcode == wire.OP_PUT:
            core.put(text, value)
            return wire.ST_OK, b""
        if opcode == wire.OP_GET:
            data = core.get(text)
            if data is None:
                return wire.ST_NOT_FOUND, b""
            return wire.ST_OK, data
        if opcode == wire.OP_EXISTS:
            return (wire.ST_OK, b"") if core.exists(text) else (wire.ST_NOT_FOUND, b"")
        if opcode == wire.OP_EVICT:
            core.evict(text)
            return wire.ST_OK, b""
        if opcode == wire.OP_PUBLISH:
            core.publish(text, value)
            return wire.ST_OK, b""
        if opcode == wire.OP_SUBSCRIBE:
            handle = core.subscribe(text)
            return wire.ST_OK, handle.encode("ascii")
        if opcode == wire.OP_NEXT:
            timeout = wire.unpack_timeout(value)
            try:
                message = core.next(text, timeout)
            except TimeoutError:
                return wire.ST_TIMEOUT, b""
            except TopicClosedError:
                return wire.ST_END_OF_STREAM, b""
            return wire.ST_OK, message
        if opcode == wire.OP_STATS:
            return wire.ST_OK, wire.pack_stats(core.stats())
        if opcode == wire.OP_CLOSE:
            core.close_topic(text)
            return wire.ST_OK, b""
        raise ProtocolError(f"unknown opcode 0x{opcode:02x}")


def _decode_key(key: bytes) -> str:
    try:
        return key.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise ProtocolError(f"key/topic is not valid UTF-8: {exc}") from exc


def _code_for(exc: ProxyKitError) -> str:
    if isinstance(exc, CapacityError):
        return "capacity"
    if isinstance(exc, ProtocolError):
        return "protocol"
    return "internal"


class _TCPServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True


class RelayServer:
    """Owns the listening socket and its accept thread."""

    def __init__(self, core: RelayCore | None = None, host: str = "127.0.0.1", port: int = 0):
        self.core = core if core is not None else RelayCore()
        self._server = _TCPServer((host, port), _Handler)
        self._server.core = self.core  # type: ignore[attr-defined]
        self._thread: threading.Thread | None = None

    @property
    def address(self) -> tuple[str, int]:
        host, port = self._server.server_address[:2]
        return str(host), int(port)

    def start(self) -> "RelayServer":
        self._thread = threading.Thread(
            target=self._server.serve_forever, name="relay-server", daemon=True
        )
        self._thread.start()
        log.info("relay server listening on %s:%d", *self.address)
        return self

    def stop(self) -> None:
        self._server.shutdown()
        self._server.server_close()
        if self._thread is not None:
            self._thread.join(timeout=5)
            self._thread = None

    def serve_forever(self) -> None:
        log.info("relay server listening on %s:%d", *self.address)
        self._server.serve_forever()

    def __enter__(self) -> "RelayServer":
        return self.start()

    def __exit__(self, *exc_info) -> None:
        self.stop()
