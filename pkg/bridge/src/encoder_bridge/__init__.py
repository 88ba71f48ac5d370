"""TCP adapter exposing frozen audio encoders over line-delimited JSON."""

from encoder_bridge.models import ModelLoadError, StubEchoModel, load_model
from encoder_bridge.protocol import (
    PROTOCOL_VERSION,
    ProtocolError,
    decode_samples,
    encode_frames,
    error_response,
    parse_request,
    success_response,
)
from encoder_bridge.server import BridgeServer, parse_endpoint, serve

__all__ = [
    "PROTOCOL_VERSION",
    "BridgeServer",
    "ModelLoadError",
    "ProtocolError",
    "StubEchoModel",
    "decode_samples",
    "encode_frames",
    "error_response",
    "load_model",
    "parse_endpoint",
    "parse_request",
    "serve",
    "success_response",
]
