"""Operation contract of the relay service, in-process and over TCP.

Both transports run the same scenarios; TCP must be observably identical
to the in-process core.
"""

import threading
import time

import pytest
from hypothesis import given, settings
import hypothesis.strategies as st

from proxykit.errors import CapacityError, ProtocolError, TopicClosedError
from proxykit.relay.client import RelayClient
from proxykit.relay.core import RelayCore
from proxykit.relay.server import RelayServer


@pytest.fixture(params=["inprocess", "tcp"])
def relay(request):
    if request.param == "inprocess":
        yield RelayCore()
        return
    server = RelayServer().start()
    client = RelayClient(*server.address)
    yield client
    client.close()
    server.stop()


KEY = "suite:0123456789abcdef0123456789abcdef"
OTHER = "suite:abcdefabcdefabcdefabcdefabcdefab"


class TestKeyValue:
    def test_empty_value_round_trip(self, relay):
        relay.put(KEY, b"")
        assert relay.get(KEY) == b""

    def test_identity_round_trip(self, relay):
        import os

        value = os.urandom(100)
        relay.put(KEY, value)
        assert relay.get(KEY) == value

    def test_overwrite_last_writer_wins(self, relay):
        # Oracle: replay the same op sequence against a plain dict.
        reference = {}
        for value in (b"v1", b"v2"):
            relay.put(KEY, value)
            reference[KEY] = value
        assert relay.get(KEY) == reference[KEY]

    def test_get_unknown_is_not_found(self, relay):
        assert relay.get(OTHER) is None

    def test_get_after_evict_is_not_found(self, relay):
        relay.put(KEY, b"x")
        relay.evict(KEY)
        assert relay.get(KEY) is None

    def test_exists(self, relay):
        assert relay.exists(KEY) is False
        relay.put(KEY, b"x")
        assert relay.exists(KEY) is True
        relay.evict(KEY)
        assert relay.exists(KEY) is False

    def test_evict_unknown_is_noop(self, relay):
        relay.evict(OTHER)
        assert relay.stats().evict_count == 0

    def test_evict_is_idempotent(self, relay):
        relay.put(KEY, b"x")
        relay.evict(KEY)
        relay.evict(KEY)
        assert relay.exists(KEY) is False
        assert relay.stats().evict_count == 1

    def test_object_count_after_put_evict_cycles(self, relay):
        keys = [f"suite:{i:032x}" for i in range(3)]
        for k in keys:
            relay.put(k, b"x")
        for k in keys:
            relay.evict(k)
        assert relay.stats().object_count == 0


class TestStats:
    def test_fresh_is_zero(self, relay):
        stats = relay.stats()
        assert stats.object_count == 0
        assert stats.total_bytes == 0

    def test_total_bytes_tracks_value_sizes(self, relay):
        relay.put(KEY, b"\0" * 10_000_000)
        assert relay.stats().total_bytes == 10_000_000

    def test_counting_oracle(self, relay):
        # 8 puts on distinct keys, 3 evicts -> 5 live objects.
        keys = [f"suite:{i:032x}" for i in range(8)]
        expected = {}
        for k in keys:
            relay.put(k, b"ab")
            expected[k] = b"ab"
        for k in keys[:3]:
            relay.evict(k)
            expected.pop(k)
        stats = relay.stats()
        assert stats.object_count == len(expected) == 5
        assert stats.total_bytes == sum(len(v) for v in expected.values())
        assert stats.put_count == 8
        assert stats.evict_count == 3

    def test_overwrite_keeps_object_count(self, relay):
        relay.put(KEY, b"abc")
        relay.put(KEY, b"defgh")
        stats = relay.stats()
        assert stats.object_count == 1
        assert stats.total_bytes == 5
        assert stats.put_count == 2


class TestCapacity:
    def test_oversize_put_rejected(self):
        core = RelayCore(max_value_bytes=16)
        with pytest.raises(CapacityError):
            core.put(KEY, b"x" * 17)
        core.put(KEY, b"x" * 16)

    def test_oversize_put_rejected_over_tcp(self):
        server = RelayServer(RelayCore(max_value_bytes=16)).start()
        client = RelayClient(*server.address)
        try:
            with pytest.raises(CapacityError):
                client.put(KEY, b"x" * 17)
        finally:
            client.close()
            server.stop()


class TestTopics:
    def test_publish_then_next(self, relay):
        handle = relay.subscribe("news")
        relay.publish("news", b"m1")
        assert relay.next(handle, timeout=1.0) == b"m1"

    def test_per_topic_fifo(self, relay):
        handle = relay.subscribe("news")
        for message in (b"m1", b"m2", b"m3"):
            relay.publish("news", message)
        received = [relay.next(handle, timeout=1.0) for _ in range(3)]
        assert received == [b"m1", b"m2", b"m3"]

    def test_fan_out_to_every_subscriber(self, relay):
        # Oracle: broadcast replay; every connected subscriber sees every message.
        handles = [relay.subscribe("news") for _ in range(2)]
        messages = [b"a", b"b", b"c"]
        for message in messages:
            relay.publish("news", message)
        for handle in handles:
            assert [relay.next(handle, timeout=1.0) for _ in messages] == messages

    def test_messages_before_subscribe_not_delivered(self, relay):
        relay.publish("news", b"early")
        handle = relay.subscribe("news")
        with pytest.raises(TimeoutError):
            relay.next(handle, timeout=0.05)

    def test_idle_next_times_out(self, relay):
        handle = relay.subscribe("news")
        started = time.monotonic()
        with pytest.raises(TimeoutError):
            relay.next(handle, timeout=0.05)
        assert time.monotonic() - started < 1.0

    def test_close_yields_end_of_stream(self, relay):
        handle = relay.subscribe("news")
        relay.publish("news", b"last")
        relay.close_topic("news")
        assert relay.next(handle, timeout=1.0) == b"last"
        with pytest.raises(TopicClosedError):
            relay.next(handle, timeout=1.0)
        # end-of-stream is sticky
        with pytest.raises(TopicClosedError):
            relay.next(handle, timeout=1.0)

    def test_subscribe_after_close_sees_end(self, relay):
        relay.close_topic("news")
        handle = relay.subscribe("news")
        with pytest.raises(TopicClosedError):
            relay.next(handle, timeout=1.0)

    def test_unknown_handle_rejected(self, relay):
        with pytest.raises(ProtocolError):
            relay.next("999", timeout=0.05)

    def test_empty_topic_rejected(self, relay):
        with pytest.raises(ProtocolError):
            relay.publish("", b"x")

    def test_overlong_topic_rejected(self, relay):
        with pytest.raises(ProtocolError):
            relay.subscribe("t" * 256)

    def test_next_blocks_until_publish(self, relay):
        # Blocking NEXT over one TCP connection would serialize with the
        # publish below, so run this scenario in-process only.
        if not isinstance(relay, RelayCore):
            pytest.skip("blocking NEXT needs a dedicated connection per subscriber")
        handle = relay.subscribe("news")
        result = {}

        def consume():
            result["message"] = relay.next(handle, timeout=5.0)

        thread = threading.Thread(target=consume)
        thread.start()
        time.sleep(0.05)
        relay.publish("news", b"wake")
        thread.join(timeout=5)
        assert result["message"] == b"wake"


class TestConcurrentConnections:
    def test_blocking_next_on_second_connection(self):
        server = RelayServer().start()
        subscriber = RelayClient(*server.address)
        publisher = RelayClient(*server.address)
        try:
            handle = subscriber.subscribe("news")
            received = {}

            def consume():
                received["message"] = subscriber.next(handle, timeout=5.0)

            thread = threading.Thread(target=consume)
            thread.start()
            time.sleep(0.05)
            publisher.publish("news", b"wake")
            thread.join(timeout=5)
            assert received["message"] == b"wake"
        finally:
            subscriber.close()
            publisher.close()
            server.stop()


class TestServeCli:
    def test_serve_subprocess_accepts_clients(self):
        import re
        import subprocess
        import sys

        proc = subprocess.Popen(
            [sys.executable, "-m", "proxykit.relay.cli", "serve", "--bind", "127.0.0.1:0"],
            stdout=subprocess.PIPE,
            text=True,
        )
        try:
            banner = proc.stdout.readline()
            match = re.search(r"listening on 127\.0\.0\.1:(\d+)", banner)
            assert match, banner
            client = RelayClient("127.0.0.1", int(match.group(1)))
            try:
                client.put(KEY, b"over the cli")
                assert client.get(KEY) == b"over the cli"
            finally:
                client.close()
        finally:
            proc.terminate()
            proc.wait(timeout=10)


@settings(max_examples=30, deadline=None)
@given(value=st.binary(max_size=2048))
def test_round_trip_property(value):
    core = RelayCore()
    core.put(KEY, value)
    assert core.get(KEY) == value


def test_stats_object_count_matches_enumerated_keys():
    core = RelayCore()
    for i in range(6):
        core.put(f"suite:{i:032x}", b"x")
    core.evict("suite:" + "0" * 32)
    live = [k for k in core.keys() if core.exists(k)]
    assert core.stats().object_count == len(live)
