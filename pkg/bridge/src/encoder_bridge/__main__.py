"""Entry point: ``encoder-bridge --stub --endpoint 127.0.0.1:8790``."""

from __future__ import annotations

import argparse
import sys

from encoder_bridge.models import ModelLoadError, load_model
from encoder_bridge.server import serve


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="encoder-bridge",
        description="serve a frozen audio encoder over line-delimited JSON",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--stub", action="store_true",
                        help="echo model needing no weights (protocol testing)")
    source.add_argument("--model", help="model factory as a module:attr path")
    parser.add_argument("--endpoint", default="127.0.0.1:8790",
                        help="host:port to listen on (default %(default)s)")
    parser.add_argument("--expected-rate", type=int, default=None,
                        help="reject requests not declaring this sample rate")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        spec = "stub" if args.stub else args.model
        model = load_model(spec, expected_rate_hz=args.expected_rate)
        serve(model, args.endpoint)
    except (ModelLoadError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except KeyboardInterrupt:
        pass
    return 0


if __name__ == "__main__":
    sys.exit(main())
