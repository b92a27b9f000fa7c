"""Globally unique keys for stored objects.

A key is ``<namespace>:<hex-id>`` where the namespace is the store name and
the id is 16 random bytes rendered as 32 lowercase hex characters.  The text
form is used verbatim on the wire and as the file name in the file backend,
so namespaces are restricted to filesystem-safe characters.
"""

from __future__ import annotations

import re
import secrets
from dataclasses import dataclass

_NAMESPACE_RE = re.compile(r"^[A-Za-z0-9._-]+$")
_HEX_ID_RE = re.compile(r"^[0-9a-f]{32}$")


@dataclass(frozen=True)
class ObjectKey:
    namespace: str
    id: str

    def __post_init__(self) -> None:
        if not _NAMESPACE_RE.match(self.namespace):
            raise ValueError(
                f"namespace must match [A-Za-z0-9._-]+, got {self.namespace!r}"
            )
        if not _HEX_ID_RE.match(self.id):
            raise ValueError(f"id must be 32 lowercase hex chars, got {self.id!r}")

    @classmethod
    def generate(cls, namespace: str) -> "ObjectKey":
        """Mint a fresh key; ids are random so repeated puts never collide."""
        return cls(namespace, secrets.token_hex(16))

    @classmethod
    def parse(cls, text: str) -> "ObjectKey":
        namespace, sep, hex_id = text.rpartition(":")
        if not sep:
            raise ValueError(f"key text must be '<namespace>:<hex-id>', got {text!r}")
        return cls(namespace, hex_id)

    def text(self) -> str:
        return f"{self.namespace}:{self.id}"

    def __str__(self) -> str:
        return self.text()
