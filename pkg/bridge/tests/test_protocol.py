"""Request parsing and payload codec tests."""

import base64
import json

import numpy as np
import pytest

from encoder_bridge.protocol import (
    PROTOCOL_VERSION,
    ProtocolError,
    decode_samples,
    encode_frames,
    error_response,
    parse_request,
    success_response,
)


def _payload(samples) -> str:
    return base64.b64encode(np.asarray(samples, dtype="<f4").tobytes()).decode("ascii")


def _request(**overrides) -> str:
    base = {"version": PROTOCOL_VERSION, "id": 1, "sample_rate_hz": 16000,
            "samples": _payload([0.25, -1.5, 3.0])}
    base.update(overrides)
    return json.dumps(base)


def test_samples_roundtrip_is_float32_exact():
    rng = np.random.default_rng(0)
    values = rng.normal(size=41)
    decoded = decode_samples(_payload(values))
    np.testing.assert_array_equal(decoded, values.astype(np.float32))
    assert decoded.dtype == np.float32


def test_frames_roundtrip_is_float32_exact():
    rng = np.random.default_rng(1)
    frames = rng.normal(size=(3, 5)).astype(np.float32)
    decoded = np.frombuffer(base64.b64decode(encode_frames(frames)), dtype="<f4")
    np.testing.assert_array_equal(decoded.reshape(3, 5), frames)


def test_decode_rejects_bad_base64():
    with pytest.raises(ProtocolError, match="decode"):
        decode_samples("!!!not base64!!!")


def test_decode_rejects_empty_and_ragged_payloads():
    with pytest.raises(ProtocolError, match="non-empty"):
        decode_samples("")
    with pytest.raises(ProtocolError, match="multiple of 4"):
        decode_samples(base64.b64encode(b"abc").decode("ascii"))
    with pytest.raises(ProtocolError, match="non-empty"):
        decode_samples(base64.b64encode(b"").decode("ascii"))


def test_parse_request_happy_path():
    request, samples = parse_request(_request())
    assert request["id"] == 1
    assert request["sample_rate_hz"] == 16000
    np.testing.assert_array_equal(samples, np.array([0.25, -1.5, 3.0], dtype=np.float32))


def test_parse_request_rejects_malformed_json():
    with pytest.raises(ProtocolError, match="malformed JSON"):
        parse_request("{oops")
    with pytest.raises(ProtocolError, match="JSON object"):
        parse_request("[1, 2, 3]")


def test_parse_request_rejects_wrong_version():
    with pytest.raises(ProtocolError, match="unsupported protocol version"):
        parse_request(_request(version=99))
    with pytest.raises(ProtocolError, match="unsupported protocol version"):
        parse_request(json.dumps({"id": 1, "sample_rate_hz": 16000, "samples": _payload([1.0])}))


def test_parse_request_requires_id_and_rate():
    no_id = json.dumps({"version": PROTOCOL_VERSION, "sample_rate_hz": 16000,
                        "samples": _payload([1.0])})
    with pytest.raises(ProtocolError, match="missing field 'id'"):
        parse_request(no_id)
    with pytest.raises(ProtocolError, match="sample_rate_hz"):
        parse_request(_request(sample_rate_hz=0))
    with pytest.raises(ProtocolError, match="sample_rate_hz"):
        parse_request(_request(sample_rate_hz="16000"))


def test_response_builders():
    frames = np.arange(6, dtype=np.float32).reshape(2, 3)
    ok = json.loads(success_response(7, frames))
    assert ok == {"version": PROTOCOL_VERSION, "id": 7, "T": 2, "D": 3,
                  "frames": encode_frames(frames)}
    err = json.loads(error_response(7, "went wrong"))
    assert err == {"version": PROTOCOL_VERSION, "id": 7, "error": "went wrong"}
    assert success_response(7, frames).endswith("\n")
    assert error_response(None, "x").endswith("\n")
