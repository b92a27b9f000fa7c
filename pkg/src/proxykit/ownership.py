"""Runtime-enforced ownership and borrowing over proxies.

Rules, enforced at the owner:

* every stored object has exactly one owner; ending the owner evicts the
  object (unless a static lifetime holds it);
* at any time an object has either one mutable reference or any number of
  immutable references, never both;
* an owner cannot end, write back, or be cloned while a mutable reference
  is outstanding, and cannot end while any reference is outstanding.

Violations raise OwnershipRuleError (OwnerEndedError once the owner has
ended, ReadOnlyError for write-back through an immutable reference).
Reference lifetimes are tied to task completion by the executor shim; a
task that stashes a reference beyond its own completion is outside the
contract and gets no defined behavior.
"""

from __future__ import annotations

import threading
from dataclasses import replace
from typing import Any

from . import serial
from .errors import (
    NotResolvedError,
    OwnerEndedError,
    OwnershipRuleError,
    ReadOnlyError,
    SerializationError,
)
from .keys import ObjectKey
from .store import (
    Factory,
    Proxy,
    evict_factory_target,
    factory_target_exists,
    read_factory_bytes,
    write_factory_bytes,
)

REF_OWNED = "owned"
REF_SHARED = "ref"
REF_MUT = "mut"


class OwnedProxy(Proxy):
    """The single owning handle for one stored object."""

    __slots__ = ("_lock", "_live_refs", "_has_mut", "_ended", "lifetime")

    def __init__(self, factory: Factory, lifetime=None):
        super().__init__(replace(factory, ref_kind=REF_OWNED))
        self._lock = threading.Lock()
        self._live_refs = 0
        self._has_mut = False
        self._ended = False
        self.lifetime = lifetime

    @property
    def live_ref_count(self) -> int:
        return self._live_refs

    @property
    def has_mut_ref(self) -> bool:
        return self._has_mut

    @property
    def ended(self) -> bool:
        return self._ended

    def resolve(self) -> Any:
        with self._lock:
            if self._ended:
                raise OwnerEndedError(f"owner of {self.factory.key} has ended")
        return super().resolve()

    def _release(self, kind: str) -> None:
        with self._lock:
            if kind == REF_MUT:
                self._has_mut = False
            else:
                self._live_refs -= 1

    # scope-exit hook: leaving a with-block ends the owner
    def __enter__(self) -> "OwnedProxy":
        return self

    def __exit__(self, *exc_info) -> None:
        end(self)


class RefProxy(Proxy):
    """Shared read-only reference; resolves the current stored value."""

    __slots__ = ("_owner", "_released")

    def __init__(self, owner: OwnedProxy):
        super().__init__(replace(owner.factory, ref_kind=REF_SHARED))
        self._owner = owner
        self._released = False

    @property
    def released(self) -> bool:
        return self._released

    def release(self) -> None:
        if not self._released:
            self._released = True
            self._owner._release(REF_SHARED)


class RefMutProxy(Proxy):
    """Exclusive mutable reference; may write back, cannot be re-shared."""

    __slots__ = ("_owner", "_released")

    def __init__(self, owner: OwnedProxy):
        super().__init__(replace(owner.factory, ref_kind=REF_MUT))
        self._owner = owner
        self._released = False

    @property
    def released(self) -> bool:
        return self._released

    def release(self) -> None:
        if not self._released:
            self._released = True
            self._owner._release(REF_MUT)


def make_ref(owner: OwnedProxy) -> RefProxy:
    with owner._lock:
        if owner._ended:
            raise OwnerEndedError(f"owner of {owner.factory.key} has ended")
        if owner._has_mut:
            raise OwnershipRuleError(
                "cannot create a shared reference while a mutable reference is live"
            )
        owner._live_refs += 1
    return RefProxy(owner)


def make_ref_mut(owner: OwnedProxy) -> RefMutProxy:
    with owner._lock:
        if owner._ended:
            raise OwnerEndedError(f"owner of {owner.factory.key} has ended")
        if owner._has_mut:
            raise OwnershipRuleError("a mutable reference is already live")
        if owner._live_refs > 0:
            raise OwnershipRuleError(
                f"cannot create a mutable reference with {owner._live_refs} shared references live"
            )
        owner._has_mut = True
    return RefMutProxy(owner)


def release(ref: RefProxy | RefMutProxy) -> None:
    ref.release()


def into_owned(proxy: Proxy, lifetime=None) -> OwnedProxy:
    """Claim ownership of a plain proxy's target.

    The original proxy must not be used afterwards; this function cannot
    invalidate it.
    """
    if isinstance(proxy, (OwnedProxy, RefProxy, RefMutProxy)):
        raise OwnershipRuleError(f"cannot take ownership from a {type(proxy).__name__}")
    # Fails on already-evicted targets instead of minting a dead owner.
    read_factory_bytes(proxy.factory)
    return OwnedProxy(replace(proxy.factory, evict_on_resolve=False), lifetime=lifetime)


def clone_owned(owner: OwnedProxy) -> OwnedProxy:
    """Copy the stored object under a fresh key with its own owner."""
    with owner._lock:
        if owner._ended:
            raise OwnerEndedError(f"owner of {owner.factory.key} has ended")
        if owner._has_mut:
            raise OwnershipRuleError("cannot clone while a mutable reference is live")
    data = read_factory_bytes(owner.factory)
    new_key = ObjectKey.generate(owner.factory.key.namespace)
    write_factory_bytes(owner.factory, data, key=new_key)
    return OwnedProxy(replace(owner.factory, key=new_key))


def update(target: OwnedProxy | RefMutProxy) -> None:
    """Write the locally resolved (and presumably modified) copy back."""
    if isinstance(target, RefProxy):
        raise ReadOnlyError("cannot write back through a shared reference")
    if isinstance(target, RefMutProxy):
        if target._released:
            raise OwnershipRuleError("mutable reference was already released")
        owner = target._owner
    elif isinstance(target, OwnedProxy):
        with target._lock:
            if target._ended:
                raise OwnerEndedError(f"owner of {target.factory.key} has ended")
            if target._has_mut:
                raise OwnershipRuleError(
                    "cannot write back from the owner while a mutable reference is live"
                )
        owner = target
    else:
        raise OwnershipRuleError(f"cannot update a {type(target).__name__}")
    if not target.is_resolved():
        raise NotResolvedError("resolve and modify the local copy before updating")
    serializer = serial.get_serializer(target.factory.serializer_id)
    try:
        data = serializer.dumps(target._value)
    except SerializationError:
        raise
    except Exception as exc:
        raise SerializationError(f"cannot serialize updated value: {exc}") from exc
    write_factory_bytes(owner.factory, data)


def end(owner: OwnedProxy) -> None:
    """Finish the owner's scope: reject if borrowed, else evict the object.

    Idempotent after success.  A static lifetime keeps the object stored.
    """
    with owner._lock:
        if owner._ended:
            return
        if owner._has_mut:
            raise OwnershipRuleError("cannot end while a mutable reference is live")
        if owner._live_refs > 0:
            raise OwnershipRuleError(
                f"cannot end with {owner._live_refs} shared references live"
            )
        owner._ended = True
    keep = owner.lifetime is not None and getattr(owner.lifetime, "kind", None) == "static"
    if not keep:
        evict_factory_target(owner.factory)


def owner_target_exists(owner: OwnedProxy) -> bool:
    return factory_target_exists(owner.factory)
