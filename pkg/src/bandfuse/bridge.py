"""Client for external encoders served over a line-delimited JSON protocol.

Wire format, one JSON object per line, protocol version 1:

    request:  {"version": 1, "id": 3, "sample_rate_hz": 16000, "samples": "<b64>"}
    response: {"version": 1, "id": 3, "T": 98, "D": 768, "frames": "<b64>"}
    error:    {"version": 1, "id": 3, "error": "why it failed"}

Sample and frame payloads are base64-encoded little-endian float32, frames
in row-major T x D order. The server never resamples; the client is
expected to deliver audio at the model's input rate. One request is in
flight per connection at a time.
"""

from __future__ import annotations

import base64
import json
import socket
import threading

import numpy as np

from bandfuse.encoder import EncoderError, EncoderHandle, FrameEmbeddings

PROTOCOL_VERSION = 1
DEFAULT_TIMEOUT_S = 60.0


class BridgeProtocolError(EncoderError):
    """Raised when the remote encoder misbehaves or reports an error."""


def encode_samples_b64(samples: np.ndarray) -> str:
    arr = np.ascontiguousarray(samples, dtype="<f4")
    return base64.b64encode(arr.tobytes()).decode("ascii")


def decode_frames_b64(data: str, t: int, d: int) -> np.ndarray:
    try:
        raw = base64.b64decode(data, validate=True)
    except Exception as exc:
        raise BridgeProtocolError(f"could not decode frames payload: {exc}") from exc
    frames = np.frombuffer(raw, dtype="<f4")
    if frames.size != t * d:
        raise BridgeProtocolError(
            f"frame payload holds {frames.size} values, expected T*D = {t}*{d}"
        )
    return frames.reshape(t, d).astype(np.float64)


def parse_endpoint(endpoint: str) -> tuple[str, int]:
    """Accepts "host:port" or a bare port (host defaults to 127.0.0.1)."""
    text = endpoint.strip()
    if ":" in text:
        host, _, port_text = text.rpartition(":")
    else:
        host, port_text = "127.0.0.1", text
    try:
        port = int(port_text)
    except ValueError:
        raise BridgeProtocolError(f"invalid endpoint {endpoint!r}") from None
    if not host:
        host = "127.0.0.1"
    return host, port


class ExternalEncoder(EncoderHandle):
    """EncoderHandle speaking the bridge protocol over TCP.

    Requests on a single connection are serialized behind a lock; use one
    handle per thread (or separate handles) for parallel connections.
    """

    def __init__(self, endpoint: str, sample_rate_hz: int = 16000,
                 timeout_s: float = DEFAULT_TIMEOUT_S):
        self.endpoint = endpoint
        self.sample_rate_hz = int(sample_rate_hz)
        self.timeout_s = timeout_s
        self.name = f"external@{endpoint}"
        self.dim: int | None = None
        self.max_input_seconds: float | None = None
        self._lock = threading.Lock()
        self._sock: socket.socket | None = None
        self._reader = None
        self._next_id = 1

    def _connect(self):
        host, port = parse_endpoint(self.endpoint)
        try:
            sock = socket.create_connection((host, port), timeout=self.timeout_s)
        except OSError as exc:
            raise BridgeProtocolError(f"cannot reach encoder at {self.endpoint}: {exc}") from exc
        self._sock = sock
        self._reader = sock.makefile("r", encoding="utf-8")

    def close(self):
        with self._lock:
            if self._reader is not None:
                self._reader.close()
                self._reader = None
            if self._sock is not None:
                self._sock.close()
                self._sock = None

    def __enter__(self):
        return self

    def __exit__(self, *exc_info):
        self.close()

    def _roundtrip(self, request: dict) -> dict:
        if self._sock is None:
            self._connect()
        line = json.dumps(request) + "\n"
        try:
            self._sock.sendall(line.encode("utf-8"))
            reply = self._reader.readline()
        except OSError as exc:
            raise BridgeProtocolError(f"bridge connection failed: {exc}") from exc
        if not reply:
            raise BridgeProtocolError("bridge closed the connection without answering")
        try:
            return json.loads(reply)
        except json.JSONDecodeError as exc:
            raise BridgeProtocolError(f"bridge sent malformed JSON: {exc}") from exc

    def encode(self, samples: np.ndarray, sample_rate_hz: int) -> FrameEmbeddings:
        samples = np.asarray(samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise EncoderError("samples must be a non-empty 1-D array")
        if sample_rate_hz != self.sample_rate_hz:
            raise EncoderError(
                f"encoder expects {self.sample_rate_hz} Hz input, got {sample_rate_hz} Hz"
            )
        with self._lock:
            request = {
                "version": PROTOCOL_VERSION,
                "id": self._next_id,
                "sample_rate_hz": int(sample_rate_hz),
                "samples": encode_samples_b64(samples),
            }
            self._next_id += 1
            response = self._roundtrip(request)
        if response.get("error"):
            raise BridgeProtocolError(f"encoder error: {response['error']}")
        if response.get("id") != request["id"]:
            raise BridgeProtocolError(
                f"response id {response.get('id')!r} does not match request id {request['id']}"
            )
        try:
            t, d = int(response["T"]), int(response["D"])
            frames = decode_frames_b64(response["frames"], t, d)
        except KeyError as exc:
            raise BridgeProtocolError(f"response is missing field {exc}") from exc
        if not np.all(np.isfinite(frames)):
            raise BridgeProtocolError("bridge returned non-finite frame values")
        if self.dim is None:
            self.dim = d
        duration_s = samples.size / sample_rate_hz
        return FrameEmbeddings(frames=frames, frame_rate_hz=t / duration_s)
