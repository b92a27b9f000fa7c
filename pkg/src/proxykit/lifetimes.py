"""Scopes that evict their attached objects when they end.

Three kinds: a context scope (ends when closed or on context-manager
exit), a time lease (ends when the lease expires; a background sweeper
checks every 500 ms), and a static scope (never ends before process
exit).  Attaching a key to an ended lifetime raises.
"""

from __future__ import annotations

import threading
import time
from typing import Union

from .errors import LifetimeEndedError
from .keys import ObjectKey
from .store import Proxy, Store

SWEEP_INTERVAL = 0.5

Attachable = Union[ObjectKey, Proxy]


def _key_of(target: Attachable) -> ObjectKey:
    if isinstance(target, Proxy):
        return target.factory.key
    return target


class _BaseLifetime:
    kind = "context"

    def __init__(self, store: Store):
        self._store = store
        self._keys: list[ObjectKey] = []
        self._done = False
        self._lock = threading.Lock()

    def attach(self, target: Attachable) -> None:
        with self._lock:
            if self._done:
                raise LifetimeEndedError(f"{self.kind} lifetime has already ended")
            self._keys.append(_key_of(target))

    def done(self) -> bool:
        with self._lock:
            return self._done

    def _end(self) -> None:
        with self._lock:
            if self._done:
                return
            self._done = True
            keys, self._keys = self._keys, []
        for key in keys:
            self._store.evict(key)


class ContextLifetime(_BaseLifetime):
    """Ends when closed; usable as a context manager."""

    kind = "context"

    def close(self) -> None:
        self._end()

    def __enter__(self) -> "ContextLifetime":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()


class StaticLifetime(_BaseLifetime):
    """Never ends before process exit; attached objects are kept stored."""

    kind = "static"

    def attach(self, target: Attachable) -> None:
        with self._lock:
            self._keys.append(_key_of(target))

    def done(self) -> bool:
        return False


class LeaseLifetime(_BaseLifetime):
    """Ends once its expiry passes; ``extend`` pushes the expiry out.

    The sweeper thread polls every ``sweep_interval`` seconds, so eviction
    lands within one interval after expiry.
    """

    kind = "lease"

    def __init__(self, store: Store, expiry: float, sweep_interval: float = SWEEP_INTERVAL):
        super().__init__(store)
        if expiry <= 0:
            raise ValueError(f"expiry must be positive, got {expiry}")
        self._expires_at = time.monotonic() + expiry
        self._sweep_interval = sweep_interval
        self._sweeper = threading.Thread(target=self._sweep, name="lease-sweeper", daemon=True)
        self._sweeper.start()

    def extend(self, delta: float) -> None:
        """Push the expiry ``delta`` seconds further out (never shortens)."""
        if delta < 0:
            raise ValueError(f"extend delta must be >= 0, got {delta}")
        with self._lock:
            if self._done:
                raise LifetimeEndedError("lease has already expired")
            self._expires_at += delta

    def remaining(self) -> float:
        with self._lock:
            return max(0.0, self._expires_at - time.monotonic())

    def _sweep(self) -> None:
        while True:
            with self._lock:
                if self._done:
                    return
                expired = time.monotonic() >= self._expires_at
            if expired:
                self._end()
                return
            time.sleep(self._sweep_interval)
