"""Write-once result slots and their blocking proxies."""

import json
import subprocess
import sys
import threading
import time
from pathlib import Path

import pytest

from proxykit.connectors import FileConnector, MemoryConnector
from proxykit.errors import AlreadySetError, DanglingReferenceError, FutureTimeoutError
from proxykit.futures import Future
from proxykit.keys import ObjectKey
from proxykit.store import Store, poll_for_bytes, register_store

PEER = Path(__file__).parent / "_future_peer.py"


@pytest.fixture
def store():
    return Store("futstore", MemoryConnector())


class TestSlotLifecycle:
    def test_fresh_future_slot_absent(self, store):
        future = store.future()
        assert store.exists(future.key) is False
        assert future.done() is False

    def test_two_futures_have_distinct_keys(self, store):
        assert store.future().key != store.future().key

    def test_serialization_round_trip_still_resolves(self, store):
        future = store.future()
        restored = Future.from_bytes(future.to_bytes())
        assert restored.key == future.key
        future.set_result(41)
        assert restored.result(timeout=1) == 41

    def test_set_then_proxy_resolves(self, store):
        future = store.future()
        future.set_result("value")
        data = future.proxy().resolve()
        assert data == "value"

    def test_second_set_rejected(self, store):
        future = store.future()
        future.set_result(1)
        with pytest.raises(AlreadySetError):
            future.set_result(2)

    def test_result_matches_proxy_resolution(self, store):
        future = store.future()
        future.set_result([1, 2])
        assert future.result(timeout=1) == future.proxy().resolve() == [1, 2]

    def test_result_timeout_on_unset(self, store):
        future = store.future()
        with pytest.raises(FutureTimeoutError):
            future.result(timeout=0.05)


class TestBlockingResolution:
    def test_proxy_of_set_future_resolves_immediately(self, store):
        future = store.future()
        future.set_result("ready")
        started = time.monotonic()
        assert future.proxy().resolve() == "ready"
        assert time.monotonic() - started < 0.5

    def test_timeout_error_arrives_on_time(self, store):
        future = store.future(timeout=0.1)
        started = time.monotonic()
        with pytest.raises(FutureTimeoutError):
            future.proxy().resolve()
        elapsed = time.monotonic() - started
        assert 0.09 <= elapsed < 1.0

    def test_consumer_unblocks_within_poll_bound(self, store):
        poll_cap = 0.05
        future = store.future(poll_interval=poll_cap)
        proxy = future.proxy()
        resolved = {}

        def consume():
            resolved["value"] = proxy.resolve()
            resolved["at"] = time.monotonic()

        thread = threading.Thread(target=consume)
        thread.start()
        time.sleep(0.2)  # let the poll loop reach its capped backoff
        future.set_result("late")
        set_at = time.monotonic()
        thread.join(timeout=5)
        assert resolved["value"] == "late"
        assert resolved["at"] - set_at <= 2 * poll_cap

    def test_order_independence(self, store):
        # consumer first, then producer: same outcome as producer first
        for consumer_first in (True, False):
            future = store.future()
            results = []
            consumer = threading.Thread(
                target=lambda f=future: results.append(f.proxy().resolve())
            )
            if consumer_first:
                consumer.start()
                time.sleep(0.02)
                future.set_result("same")
            else:
                future.set_result("same")
                consumer.start()
            consumer.join(timeout=5)
            assert results == ["same"]

    def test_multi_proxy_consistency(self, store):
        future = store.future()
        proxies = [future.proxy() for _ in range(4)]
        future.set_result({"n": 1})
        values = [p.resolve() for p in proxies]
        assert all(v == {"n": 1} for v in values)

    def test_slot_evicted_mid_wait_dangles(self):
        class Flaky:
            def exists(self, key):
                return True

            def get(self, key):
                return None

        with pytest.raises(DanglingReferenceError):
            poll_for_bytes(Flaky(), ObjectKey.generate("x"), timeout=1)


class TestMetricsRouting:
    def test_set_result_via_registered_store_counts(self, store):
        register_store(store)
        future = store.future()
        future.set_result(b"counted")
        assert store.metrics.puts == 1
        future.proxy().resolve()
        assert store.metrics.gets == 1


def _spawn_peer():
    return subprocess.Popen(
        [sys.executable, str(PEER)],
        stdin=subprocess.PIPE,
        stdout=subprocess.PIPE,
        text=True,
    )


def _ask(peer, command):
    peer.stdin.write(json.dumps(command) + "\n")
    peer.stdin.flush()
    return json.loads(peer.stdout.readline())


class TestCrossProcess:
    def test_subprocess_producer_main_consumer(self, tmp_path):
        store = Store("xproc", FileConnector(tmp_path))
        future = store.future(poll_interval=0.02)
        peer = _spawn_peer()
        try:
            reply = _ask(peer, {"op": "set", "future": future.to_bytes().hex(), "value": "remote"})
            assert reply["key"] == str(future.key)
            assert future.proxy().resolve() == "remote"
        finally:
            _ask_exit(peer)

    def test_subprocess_consumer_main_producer(self, tmp_path):
        store = Store("xproc2", FileConnector(tmp_path))
        future = store.future(poll_interval=0.02)
        peer = _spawn_peer()
        try:
            proxy_hex = future.proxy().factory.to_bytes().hex()
            # consumer blocks in the subprocess before the result exists
            peer.stdin.write(json.dumps({"op": "resolve", "future": proxy_hex}) + "\n")
            peer.stdin.flush()
            time.sleep(0.1)
            future.set_result(1234)
            reply = json.loads(peer.stdout.readline())
            assert reply["value"] == 1234
        finally:
            _ask_exit(peer)


def _ask_exit(peer):
    try:
        peer.stdin.write(json.dumps({"op": "exit"}) + "\n")
        peer.stdin.flush()
    except BrokenPipeError:
        pass
    peer.wait(timeout=10)
