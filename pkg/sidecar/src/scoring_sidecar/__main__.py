"""Launcher: load config, build the app, serve it with uvicorn."""

from __future__ import annotations

import argparse
import os
import sys

import uvicorn

from .config import load_config
from .errors import SidecarError
from .service import create_app


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="scoring-sidecar",
        description=(
            "Serve relevance scoring, claim verification, and rewrite "
            "proxying over HTTP."
        ),
    )
    parser.add_argument("--config", required=True, help="path to a JSON config file")
    parser.add_argument("--host", default=None, help="override the configured bind host")
    parser.add_argument(
        "--port", type=int, default=None, help="override the configured bind port"
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config, env=os.environ)
        app = create_app(config)
    except SidecarError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    uvicorn.run(
        app,
        host=args.host or config.host,
        port=args.port if args.port is not None else config.port,
        log_level="warning",
    )
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
