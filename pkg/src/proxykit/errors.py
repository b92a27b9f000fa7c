"""Exception hierarchy shared across the package."""


class ProxyKitError(Exception):
    """Base class for all errors raised by this package."""


class TransportError(ProxyKitError):
    """A network or I/O failure, distinct from a not-found result."""


class ProtocolError(TransportError):
    """Malformed frame, unknown opcode, or bad field on the wire."""


class CapacityError(ProxyKitError):
    """Value exceeds the channel's configured maximum size."""


class ConfigError(ProxyKitError):
    """Invalid or unknown configuration (connector kind, store name clash)."""


class SerializationError(ProxyKitError):
    """Value cannot be encoded or bytes cannot be decoded."""


class DanglingReferenceError(ProxyKitError):
    """The proxied target no longer exists in the channel."""


class FutureTimeoutError(ProxyKitError, TimeoutError):
    """Waiting on an unset result slot exceeded the allowed time."""


class AlreadySetError(ProxyKitError):
    """A write-once result slot was set a second time."""


class TopicClosedError(ProxyKitError):
    """The subscribed topic has ended; no further messages will arrive."""


class MalformedEventError(ProxyKitError):
    """A stream message could not be decoded into events."""


class UnmappedTopicError(ConfigError):
    """Producer was asked to send to a topic with no store mapping."""


class OwnershipRuleError(ProxyKitError):
    """An operation violated the ownership or reference rules."""


class OwnerEndedError(OwnershipRuleError):
    """Operation on an owner whose object has already been released."""


class ReadOnlyError(OwnershipRuleError):
    """Attempted write-back through a read-only reference."""


class NotResolvedError(ProxyKitError):
    """Write-back requested before the local copy was resolved."""


class LifetimeEndedError(ProxyKitError):
    """Attach or extend on a lifetime that has already ended."""
