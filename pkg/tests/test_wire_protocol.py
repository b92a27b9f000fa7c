"""Bit-exact conformance of server and client against the recorded frames."""

import json
import socket
import struct
import threading
from pathlib import Path

import pytest

import proxykit.relay.protocol as wire
from proxykit.errors import TopicClosedError
from proxykit.relay.client import RelayClient
from proxykit.relay.core import StoreStats
from proxykit.relay.server import RelayServer

VECTORS = json.loads((Path(__file__).parent / "data" / "wire_vectors.json").read_text())
STEPS = VECTORS["steps"]


def step(name):
    matches = [s for s in STEPS if s["name"] == name]
    assert len(matches) == 1
    return matches[0]


def recv_exact(sock: socket.socket, n: int) -> bytes:
    data = bytearray()
    while len(data) < n:
        chunk = sock.recv(n - len(data))
        assert chunk, "connection closed early"
        data.extend(chunk)
    return bytes(data)


def test_vector_file_covers_every_opcode():
    covered = {s["op"] for s in STEPS}
    assert covered == set(wire.OPCODES.values())


def test_vector_framing_matches_documented_layout():
    # Spot-check that the frozen hex really is opcode + u32 keylen + key +
    # u64 vallen + value, rebuilt here without the library's encoder.
    key = b"golden:0123456789abcdef0123456789abcdef"
    expected = struct.pack(">BI", 0x01, len(key)) + key + struct.pack(">Q", 5) + b"hello"
    assert bytes.fromhex(step("put_value")["request"]) == expected
    assert bytes.fromhex(step("get_value")["response"]) == struct.pack(">BQ", 0x00, 5) + b"hello"


def test_server_replays_recorded_session_bit_exactly():
    with RelayServer() as server:
        with socket.create_connection(server.address) as sock:
            for entry in STEPS:
                sock.sendall(bytes.fromhex(entry["request"]))
                expected = bytes.fromhex(entry["response"])
                actual = recv_exact(sock, len(expected))
                assert actual == expected, f"step {entry['name']} diverged"


class ScriptedPeer:
    """Plays the server side of the recorded session, byte for byte."""

    def __init__(self, steps):
        self.steps = steps
        self.failures = []
        self._sock = socket.socket()
        self._sock.bind(("127.0.0.1", 0))
        self._sock.listen(1)
        self.address = self._sock.getsockname()
        self._thread = threading.Thread(target=self._serve, daemon=True)
        self._thread.start()

    def _serve(self):
        conn, _ = self._sock.accept()
        with conn:
            for entry in self.steps:
                expected = bytes.fromhex(entry["request"])
                actual = recv_exact(conn, len(expected))
                if actual != expected:
                    self.failures.append(
                        f"step {entry['name']}: got {actual.hex()}, want {expected.hex()}"
                    )
                    return
                conn.sendall(bytes.fromhex(entry["response"]))

    def finish(self):
        self._thread.join(timeout=5)
        self._sock.close()
        assert not self.failures, self.failures[0]


def test_client_emits_and_decodes_recorded_frames():
    peer = ScriptedPeer(STEPS)
    client = RelayClient(*peer.address)
    key = "golden:0123456789abcdef0123456789abcdef"
    missing = "golden:ffffffffffffffffffffffffffffffff"
    try:
        assert client.stats() == StoreStats(0, 0, 0, 0, 0)
        client.put(key, b"hello")
        assert client.get(key) == b"hello"
        assert client.exists(key) is True
        assert client.get(missing) is None
        assert client.exists(missing) is False
        assert client.subscribe("golden-topic") == "1"
        with pytest.raises(TimeoutError):
            client.next("1", timeout=0.05)
        client.publish("golden-topic", b"event-1")
        assert client.next("1", timeout=0.05) == b"event-1"
        client.close_topic("golden-topic")
        with pytest.raises(TopicClosedError):
            client.next("1", timeout=0.05)
        client.evict(key)
        client.evict(key)
        assert client.stats() == StoreStats(0, 0, 1, 2, 1)
    finally:
        client.close()
        peer.finish()


def test_error_payload_round_trip():
    payload = wire.pack_error("capacity", "too big")
    assert wire.unpack_error(payload) == ("capacity", "too big")
    assert wire.unpack_error(b"no separator here") == ("internal", "no separator here")


def test_timeout_field_encoding():
    assert wire.pack_timeout(None) == b""
    assert wire.pack_timeout(0.05) == (50).to_bytes(8, "big")
    assert wire.unpack_timeout(b"") is None
    assert wire.unpack_timeout((1500).to_bytes(8, "big")) == 1.5


def test_stats_payload_round_trip():
    stats = StoreStats(3, 4096, 10, 7, 2)
    assert wire.unpack_stats(wire.pack_stats(stats)) == stats
