"""Command line entry point: ``relay-store serve``."""

from __future__ import annotations

import argparse
import logging

from .core import DEFAULT_MAX_VALUE_BYTES, RelayCore
from .server import RelayServer


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relay-store", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)
    serve = sub.add_parser("serve", help="run a relay server until interrupted")
    serve.add_argument(
        "--bind",
        default="127.0.0.1:8750",
        metavar="HOST:PORT",
        help="listen address (default %(default)s)",
    )
    serve.add_argument(
        "--max-value-bytes",
        type=int,
        default=DEFAULT_MAX_VALUE_BYTES,
        metavar="N",
        help="reject values larger than N bytes (default %(default)s)",
    )
    serve.add_argument("--log-level", default="INFO", help="logging level (default %(default)s)")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=args.log_level.upper(), format="%(asctime)s %(levelname)s %(message)s")
    host, sep, port_text = args.bind.rpartition(":")
    if not sep:
        raise SystemExit(f"--bind must be HOST:PORT, got {args.bind!r}")
    server = RelayServer(RelayCore(max_value_bytes=args.max_value_bytes), host, int(port_text))
    print(f"relay-store listening on {server.address[0]}:{server.address[1]}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
