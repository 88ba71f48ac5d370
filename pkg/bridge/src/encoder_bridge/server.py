"""Line-JSON TCP server wrapping one frozen encoder model.

Each connection handles one request at a time in arrival order; multiple
connections are served by one thread each, with model inference
serialized behind a single lock. A malformed request produces an error
response and leaves the connection open; only a closed peer ends the
handler loop.
"""

from __future__ import annotations

import socketserver
import threading
import traceback

import numpy as np

from encoder_bridge.protocol import (
    ProtocolError,
    error_response,
    parse_request,
    success_response,
)


def _summarize(exc: BaseException) -> str:
    return "".join(traceback.format_exception_only(type(exc), exc)).strip()


class _Handler(socketserver.StreamRequestHandler):
    def handle(self):
        server: BridgeServer = self.server
        for raw in self.rfile:
            line = raw.decode("utf-8", errors="replace").strip()
            if not line:
                continue
            self.wfile.write(server.answer(line).encode("utf-8"))
            self.wfile.flush()


class BridgeServer(socketserver.ThreadingTCPServer):
    """Listens on (host, port); ``port=0`` picks a free one (see ``.port``)."""

    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, model, host: str = "127.0.0.1", port: int = 0):
        self.model = model
        self._inference_lock = threading.Lock()
        super().__init__((host, port), _Handler)
        self.port = self.server_address[1]

    def answer(self, line: str) -> str:
        """One response line (with trailing newline) for one request line."""
        request_id = None
        try:
            request, samples = parse_request(line)
            request_id = request.get("id")
            expected = self.model.expected_rate_hz
            if expected is not None and request["sample_rate_hz"] != expected:
                raise ProtocolError(
                    f"model {self.model.name} expects {expected} Hz input, "
                    f"got {request['sample_rate_hz']} Hz"
                )
        except ProtocolError as exc:
            if request_id is None:
                request_id = exc.request_id
            return error_response(request_id, str(exc))

        with self._inference_lock:
            try:
                frames = np.asarray(self.model.encode(samples, request["sample_rate_hz"]))
            except Exception as exc:  # noqa: BLE001 - model failures become error responses
                return error_response(request_id, f"model failure: {_summarize(exc)}")
        if frames.ndim != 2 or frames.size == 0:
            return error_response(
                request_id, f"model returned shape {frames.shape}, expected a non-empty T x D matrix"
            )
        if not np.all(np.isfinite(frames)):
            return error_response(request_id, "model produced non-finite frame values")
        return success_response(request_id, frames)


def serve(model, endpoint: str) -> None:
    """Run the bridge until interrupted. ``endpoint`` is host:port or a bare port."""
    host, port = parse_endpoint(endpoint)
    with BridgeServer(model, host, port) as server:
        print(f"encoder-bridge: {model.name} listening on {host}:{server.port}", flush=True)
        server.serve_forever()


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    text = str(endpoint).strip()
    if ":" in text:
        host, _, port_text = text.rpartition(":")
    else:
        host, port_text = "127.0.0.1", text
    try:
        port = int(port_text)
    except ValueError:
        raise ValueError(f"invalid endpoint {endpoint!r}") from None
    return host or "127.0.0.1", port
