"""Binary framing for the relay service.

Request frame:
    1 byte  opcode
    4 bytes big-endian key/topic length
    N bytes key/topic (UTF-8)
    8 bytes big-endian value length
    M bytes value

The value field is zero-length where an opcode has no value.  NEXT carries
the subscription handle in the key field and an optional timeout in the
value field (8-byte big-endian milliseconds; empty value means block
forever).

Response frame:
    1 byte  status
    8 bytes big-endian payload length
    N bytes payload

ERROR payloads are UTF-8 ``<code>:<message>`` where code is one of
``capacity``, ``protocol``, ``internal``.  STATS payloads are five u64
big-endian counters: object_count, total_bytes, put_count, get_count,
evict_count.
"""

from __future__ import annotations

import struct
from typing import BinaryIO

from ..errors import CapacityError, ProtocolError, TransportError
from .core import StoreStats

OP_PUT = 0x01
OP_GET = 0x02
OP_EXISTS = 0x03
OP_EVICT = 0x04
OP_PUBLISH = 0x05
OP_SUBSCRIBE = 0x06
OP_NEXT = 0x07
OP_STATS = 0x08
OP_CLOSE = 0x09

OPCODES = {
    OP_PUT: "PUT",
    OP_GET: "GET",
    OP_EXISTS: "EXISTS",
    OP_EVICT: "EVICT",
    OP_PUBLISH: "PUBLISH",
    OP_SUBSCRIBE: "SUBSCRIBE",
    OP_NEXT: "NEXT",
    OP_STATS: "STATS",
    OP_CLOSE: "CLOSE",
}

ST_OK = 0x00
ST_NOT_FOUND = 0x01
ST_TIMEOUT = 0x02
ST_END_OF_STREAM = 0x03
ST_ERROR = 0x7F

# Defensive bound on the key/topic field; real keys are ~40 bytes and
# topics are capped at 255 by the service contract.
MAX_KEY_FIELD_BYTES = 4096

_REQ_HEAD = struct.Struct(">BI")
_VAL_LEN = struct.Struct(">Q")
_RESP_HEAD = struct.Struct(">BQ")
_STATS = struct.Struct(">QQQQQ")


def pack_request(opcode: int, key: bytes, value: bytes = b"") -> bytes:
    return _REQ_HEAD.pack(opcode, len(key)) + key + _VAL_LEN.pack(len(value)) + value


def pack_response(status: int, payload: bytes = b"") -> bytes:
    return _RESP_HEAD.pack(status, len(payload)) + payload


def read_request(stream: BinaryIO, max_value_bytes: int) -> tuple[int, bytes, bytes] | None:
    """Read one request frame; returns None on clean EOF before any byte."""
    head = stream.read(1)
    if not head:
        return None
    opcode = head[0]
    key_len = int.from_bytes(_read_exact(stream, 4), "big")
    if key_len > MAX_KEY_FIELD_BYTES:
        raise ProtocolError(f"key field too large: {key_len}")
    key = _read_exact(stream, key_len)
    value_len = int.from_bytes(_read_exact(stream, 8), "big")
    if value_len > max_value_bytes:
        # Drain is pointless at this size; the handler reports and closes.
        raise CapacityError(f"value length {value_len} exceeds limit {max_value_bytes}")
    value = _read_exact(stream, value_len)
    return opcode, key, value


def read_response(stream: BinaryIO) -> tuple[int, bytes]:
    head = _read_exact(stream, 9)
    status, payload_len = _RESP_HEAD.unpack(head)
    payload = _read_exact(stream, payload_len)
    return status, payload


def _read_exact(stream: BinaryIO, n: int) -> bytes:
    chunks = bytearray()
    while len(chunks) < n:
        chunk = stream.read(n - len(chunks))
        if not chunk:
            raise TransportError("connection closed mid-frame")
        chunks.extend(chunk)
    return bytes(chunks)


def pack_stats(stats: StoreStats) -> bytes:
    return _STATS.pack(
        stats.object_count,
        stats.total_bytes,
        stats.put_count,
        stats.get_count,
        stats.evict_count,
    )


def unpack_stats(payload: bytes) -> StoreStats:
    if len(payload) != _STATS.size:
        raise ProtocolError(f"stats payload must be {_STATS.size} bytes, got {len(payload)}")
    return StoreStats(*_STATS.unpack(payload))


def pack_timeout(timeout: float | None) -> bytes:
    if timeout is None:
        return b""
    millis = max(0, int(round(timeout * 1000)))
    return millis.to_bytes(8, "big")


def unpack_timeout(value: bytes) -> float | None:
    if not value:
        return None
    if len(value) != 8:
        raise ProtocolError(f"timeout field must be 0 or 8 bytes, got {len(value)}")
    return int.from_bytes(value, "big") / 1000.0


def pack_error(code: str, message: str) -> bytes:
    return f"{code}:{message}".encode("utf-8")


def unpack_error(payload: bytes) -> tuple[str, str]:
    text = payload.decode("utf-8", errors="replace")
    code, sep, message = text.partition(":")
    if not sep:
        return "internal", text
    return code, message
