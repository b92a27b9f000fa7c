"""Subprocess peer for cross-process future tests.

Reads JSON commands from stdin, one per line, and answers each with one
JSON line on stdout:

    {"op": "set", "future": <hex>, "value": ..., "delay": 0.0}
        -> {"key": ..., "set_at": <unix time just after set_result>}
    {"op": "resolve", "future": <hex>}
        -> {"key": ..., "value": ..., "resolved_at": <unix time>}
    {"op": "exit"} -> terminates
"""

import json
import sys
import time

from proxykit.futures import Future
from proxykit.store import deserialize_proxy


def main() -> int:
    for line in sys.stdin:
        line = line.strip()
        if not line:
            continue
        command = json.loads(line)
        if command["op"] == "exit":
            return 0
        future_bytes = bytes.fromhex(command["future"])
        if command["op"] == "set":
            future = Future.from_bytes(future_bytes)
            delay = command.get("delay", 0.0)
            if delay:
                time.sleep(delay)
            future.set_result(command["value"])
            reply = {"key": str(future.key), "set_at": time.time()}
        elif command["op"] == "resolve":
            proxy = deserialize_proxy(future_bytes)
            value = proxy.resolve()
            reply = {"key": str(proxy.factory.key), "value": value, "resolved_at": time.time()}
        else:
            reply = {"error": f"unknown op {command['op']!r}"}
        print(json.dumps(reply), flush=True)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
