from .app import build_app, serve
from .protocol import (PROTOCOL_VERSION, TELEMETRY_FIELDS, TRAIL_CAP,
                       ProtocolError, decode_message, encode_message,
                       error_frame)
from .session import DriveSession, network_id

__all__ = [
    "PROTOCOL_VERSION", "TELEMETRY_FIELDS", "TRAIL_CAP", "DriveSession",
    "ProtocolError", "build_app", "decode_message", "encode_message",
    "error_frame", "network_id", "serve",
]
