"""Wire protocol: one JSON object per line, base64 float32 payloads.

    request:  {"version": 1, "id": 3, "sample_rate_hz": 16000, "samples": "<b64>"}
    response: {"version": 1, "id": 3, "T": 98, "D": 768, "frames": "<b64>"}
    error:    {"version": 1, "id": 3, "error": "why it failed"}

Payloads are little-endian float32; frames are row-major T x D. The
server never resamples, so the declared sample rate must match the
model's expected input rate.
"""

from __future__ import annotations

import base64
import json

import numpy as np

PROTOCOL_VERSION = 1


class ProtocolError(ValueError):
    """Malformed request; the message becomes the error response.

    request_id is set once the envelope parsed far enough to know it, so
    the error response can still be correlated with the request.
    """

    def __init__(self, message: str, request_id=None):
        super().__init__(message)
        self.request_id = request_id


def decode_samples(payload: str) -> np.ndarray:
    if not isinstance(payload, str) or not payload:
        raise ProtocolError("request field 'samples' must be a non-empty base64 string")
    try:
        raw = base64.b64decode(payload, validate=True)
    except Exception as exc:
        raise ProtocolError(f"could not decode samples payload: {exc}") from exc
    if len(raw) == 0 or len(raw) % 4 != 0:
        raise ProtocolError(
            f"samples payload holds {len(raw)} bytes, expected a non-empty multiple of 4"
        )
    return np.frombuffer(raw, dtype="<f4")


def encode_frames(frames: np.ndarray) -> str:
    arr = np.ascontiguousarray(frames, dtype="<f4")
    return base64.b64encode(arr.tobytes()).decode("ascii")


def parse_request(line: str) -> tuple[dict, np.ndarray]:
    """Validated request dict plus its decoded float32 sample vector."""
    try:
        request = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ProtocolError(f"malformed JSON request: {exc}") from exc
    if not isinstance(request, dict):
        raise ProtocolError("request must be a JSON object")
    version = request.get("version")
    if version != PROTOCOL_VERSION:
        raise ProtocolError(f"unsupported protocol version {version!r}, expected {PROTOCOL_VERSION}")
    if "id" not in request:
        raise ProtocolError("request is missing field 'id'")
    try:
        rate = request.get("sample_rate_hz")
        if not isinstance(rate, int) or rate <= 0:
            raise ProtocolError("request field 'sample_rate_hz' must be a positive integer")
        samples = decode_samples(request.get("samples"))
    except ProtocolError as exc:
        exc.request_id = request["id"]
        raise
    return request, samples


def error_response(request_id, message: str) -> str:
    return json.dumps({"version": PROTOCOL_VERSION, "id": request_id, "error": message}) + "\n"


def success_response(request_id, frames: np.ndarray) -> str:
    t, d = frames.shape
    return json.dumps({
        "version": PROTOCOL_VERSION,
        "id": request_id,
        "T": int(t),
        "D": int(d),
        "frames": encode_frames(frames),
    }) + "\n"
