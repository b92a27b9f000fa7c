"""Self-describing tagged binary value encoding.

One byte of type tag followed by big-endian lengths and a recursive body.
The format is deliberately small and language-neutral:

    0x01 bytes   tag + u32 length + raw bytes
    0x02 str     tag + u32 length + UTF-8 bytes
    0x03 int     tag + u32 length + signed big-endian two's complement
    0x04 float   tag + 8-byte IEEE 754 big-endian
    0x05 bool    tag + 1 byte (0x00 / 0x01)
    0x06 none    tag only
    0x07 list    tag + u32 count + encoded items
    0x08 map     tag + u32 count + (u32 key length + UTF-8 key + encoded
                 value) per entry, entries sorted by key bytes

Map keys must be strings.  Encoding is deterministic: the same value always
produces the same bytes.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Any, Callable

from .errors import ConfigError, SerializationError

TAG_BYTES = 0x01
TAG_STR = 0x02
TAG_INT = 0x03
TAG_FLOAT = 0x04
TAG_BOOL = 0x05
TAG_NONE = 0x06
TAG_LIST = 0x07
TAG_MAP = 0x08

_U32 = struct.Struct(">I")
_F64 = struct.Struct(">d")


def dumps(value: Any) -> bytes:
    out = bytearray()
    _encode(value, out)
    return bytes(out)


def loads(data: bytes) -> Any:
    value, offset = _decode(data, 0)
    if offset != len(data):
        raise SerializationError(f"{len(data) - offset} trailing bytes after value")
    return value


def _encode(value: Any, out: bytearray) -> None:
    # bool first: bool is a subclass of int
    if isinstance(value, bool):
        out.append(TAG_BOOL)
        out.append(0x01 if value else 0x00)
    elif value is None:
        out.append(TAG_NONE)
    elif isinstance(value, (bytes, bytearray)):
        out.append(TAG_BYTES)
        out += _U32.pack(len(value))
        out += value
    elif isinstance(value, str):
        raw = value.encode("utf-8")
        out.append(TAG_STR)
        out += _U32.pack(len(raw))
        out += raw
    elif isinstance(value, int):
        raw = value.to_bytes((value.bit_length() + 8) // 8 or 1, "big", signed=True)
        out.append(TAG_INT)
        out += _U32.pack(len(raw))
        out += raw
    elif isinstance(value, float):
        out.append(TAG_FLOAT)
        out += _F64.pack(value)
    elif isinstance(value, (list, tuple)):
        out.append(TAG_LIST)
        out += _U32.pack(len(value))
        for item in value:
            _encode(item, out)
    elif isinstance(value, dict):
        entries = []
        for key in value:
            if not isinstance(key, str):
                raise SerializationError(f"map keys must be str, got {type(key).__name__}")
            entries.append((key.encode("utf-8"), value[key]))
        entries.sort(key=lambda kv: kv[0])
        out.append(TAG_MAP)
        out += _U32.pack(len(entries))
        for raw_key, item in entries:
            out += _U32.pack(len(raw_key))
            out += raw_key
            _encode(item, out)
    else:
        raise SerializationError(f"cannot encode value of type {type(value).__name__}")


def _decode(data: bytes, offset: int) -> tuple[Any, int]:
    if offset >= len(data):
        raise SerializationError("truncated value: missing tag")
    tag = data[offset]
    offset += 1
    if tag == TAG_BOOL:
        _need(data, offset, 1)
        return data[offset] != 0, offset + 1
    if tag == TAG_NONE:
        return None, offset
    if tag == TAG_BYTES:
        length, offset = _read_u32(data, offset)
        _need(data, offset, length)
        return bytes(data[offset : offset + length]), offset + length
    if tag == TAG_STR:
        length, offset = _read_u32(data, offset)
        _need(data, offset, length)
        try:
            return data[offset : offset + length].decode("utf-8"), offset + length
        except UnicodeDecodeError as exc:
            raise SerializationError(f"invalid UTF-8 in string: {exc}") from exc
    if tag == TAG_INT:
        length, offset = _read_u32(data, offset)
        _need(data, offset, length)
        return int.from_bytes(data[offset : offset + length], "big", signed=True), offset + length
    if tag == TAG_FLOAT:
        _need(data, offset, 8)
        return _F64.unpack_from(data, offset)[0], offset + 8
    if tag == TAG_LIST:
        count, offset = _read_u32(data, offset)
        items = []
        for _ in range(count):
            item, offset = _decode(data, offset)
            items.append(item)
        return items, offset
    if tag == TAG_MAP:
        count, offset = _read_u32(data, offset)
        result: dict[str, Any] = {}
        for _ in range(count):
            key_len, offset = _read_u32(data, offset)
            _need(data, offset, key_len)
            try:
                key = data[offset : offset + key_len].decode("utf-8")
            except UnicodeDecodeError as exc:
                raise SerializationError(f"invalid UTF-8 in map key: {exc}") from exc
            offset += key_len
            result[key], offset = _decode(data, offset)
        return result, offset
    raise SerializationError(f"unknown type tag 0x{tag:02x}")


def _read_u32(data: bytes, offset: int) -> tuple[int, int]:
    _need(data, offset, 4)
    return _U32.unpack_from(data, offset)[0], offset + 4


def _need(data: bytes, offset: int, n: int) -> None:
    if offset + n > len(data):
        raise SerializationError("truncated value")


@dataclass(frozen=True)
class Serializer:
    """A named pair of encode/decode functions usable by factories."""

    id: str
    dumps: Callable[[Any], bytes]
    loads: Callable[[bytes], Any]


_SERIALIZERS: dict[str, Serializer] = {}


def register_serializer(serializer: Serializer) -> None:
    if serializer.id in _SERIALIZERS:
        raise ConfigError(f"serializer {serializer.id!r} already registered")
    _SERIALIZERS[serializer.id] = serializer


def get_serializer(serializer_id: str) -> Serializer:
    try:
        return _SERIALIZERS[serializer_id]
    except KeyError:
        raise ConfigError(f"unknown serializer {serializer_id!r}") from None


register_serializer(Serializer("canonical", dumps, loads))
