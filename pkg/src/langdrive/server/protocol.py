"""Wire protocol for the live driving service.

JSON text messages over a websocket, one message per frame. Five types:
`hello` (road geometry, server to client, once per connect and after each
reset), `telemetry` (once per simulation tick), `instruction` and `reset`
(client to server), `error` (server to client). Schemas are exact: every
listed key required, no extras. PROTOCOL.md in the repository root is the
reference copy.
"""

from __future__ import annotations

import json

PROTOCOL_VERSION = 1
TRAIL_CAP = 100

TELEMETRY_FIELDS = ("tick", "pose", "speed", "subtask", "votes",
                    "instruction", "net_id", "trail")
HELLO_FIELDS = ("protocol", "net_id", "town", "dt", "lane_width", "nodes",
                "roads")
SUBTASK_NAMES = ("lanefollow", "left", "right", "straight")


class ProtocolError(ValueError):
    """Raised on any message that fails schema validation."""

    def __init__(self, code: str, detail: str = ""):
        super().__init__(f"{code}: {detail}" if detail else code)
        self.code = code
        self.detail = detail


def encode_message(msg: dict) -> str:
    """Canonical wire text: sorted keys, no whitespace, finite numbers."""
    return json.dumps(msg, sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


def _require(msg: dict, fields: tuple):
    missing = [k for k in fields if k not in msg]
    if missing:
        raise ProtocolError("missing_field", ", ".join(missing))
    extra = sorted(set(msg) - set(fields) - {"type"})
    if extra:
        raise ProtocolError("unknown_field", ", ".join(extra))


def _number(msg, key):
    v = msg[key]
    if not isinstance(v, (int, float)) or isinstance(v, bool):
        raise ProtocolError("bad_value", f"{key} must be a number")
    return v


def _coords(v, key, n):
    if (not isinstance(v, list) or len(v) != n
            or any(isinstance(c, bool) or not isinstance(c, (int, float))
                   for c in v)):
        raise ProtocolError("bad_value", f"{key} must be {n} numbers")


def _pose(v, key):
    _coords(v, key, 3)


def _check_instruction(msg):
    _require(msg, ("text", "ts"))
    if not isinstance(msg["text"], str):
        raise ProtocolError("bad_value", "text must be a string")
    if not msg["text"].strip():
        raise ProtocolError("empty_instruction", "instruction text is blank")
    _number(msg, "ts")


def _check_reset(msg):
    allowed = ("seed",) if "seed" in msg else ()
    _require(msg, allowed)
    if "seed" in msg:
        if isinstance(msg["seed"], bool) or not isinstance(msg["seed"], int):
            raise ProtocolError("bad_value", "seed must be an integer")


def _check_telemetry(msg):
    _require(msg, TELEMETRY_FIELDS)
    tick = msg["tick"]
    if isinstance(tick, bool) or not isinstance(tick, int) or tick < 0:
        raise ProtocolError("bad_value", "tick must be a non-negative integer")
    _pose(msg["pose"], "pose")
    _number(msg, "speed")
    if msg["subtask"] not in SUBTASK_NAMES:
        raise ProtocolError("bad_value", f"unknown subtask {msg['subtask']!r}")
    votes = msg["votes"]
    if not isinstance(votes, list) or any(v not in (0, 1) for v in votes):
        raise ProtocolError("bad_value", "votes must be a list of 0/1")
    if msg["instruction"] is not None and not isinstance(msg["instruction"], str):
        raise ProtocolError("bad_value", "instruction must be text or null")
    if not isinstance(msg["net_id"], str):
        raise ProtocolError("bad_value", "net_id must be a string")
    trail = msg["trail"]
    if not isinstance(trail, list) or len(trail) > TRAIL_CAP:
        raise ProtocolError("bad_value", f"trail must hold at most {TRAIL_CAP} poses")
    for p in trail:
        _pose(p, "trail entry")


def _check_hello(msg):
    _require(msg, HELLO_FIELDS)
    if msg["protocol"] != PROTOCOL_VERSION:
        raise ProtocolError("bad_value", f"protocol must be {PROTOCOL_VERSION}")
    if not isinstance(msg["net_id"], str) or not isinstance(msg["town"], str):
        raise ProtocolError("bad_value", "net_id and town must be strings")
    _number(msg, "dt")
    _number(msg, "lane_width")
    if not isinstance(msg["nodes"], list):
        raise ProtocolError("bad_value", "nodes must be a list of [x, y]")
    for p in msg["nodes"]:
        _coords(p, "node", 2)
    if not isinstance(msg["roads"], list):
        raise ProtocolError("bad_value", "roads must be a list of polylines")
    for line in msg["roads"]:
        if not isinstance(line, list) or len(line) < 2:
            raise ProtocolError("bad_value", "road polyline needs 2+ points")
        for p in line:
            _coords(p, "road point", 2)


def _check_error(msg):
    _require(msg, ("code", "detail"))
    if not isinstance(msg["code"], str) or not isinstance(msg["detail"], str):
        raise ProtocolError("bad_value", "code and detail must be strings")


_VALIDATORS = {
    "hello": _check_hello,
    "telemetry": _check_telemetry,
    "instruction": _check_instruction,
    "reset": _check_reset,
    "error": _check_error,
}


def decode_message(text: str | bytes) -> dict:
    """Parse and validate one wire message; raises ProtocolError."""
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ProtocolError("bad_utf8", str(e)) from None
    try:
        msg = json.loads(text)
    except json.JSONDecodeError as e:
        raise ProtocolError("bad_json", str(e)) from None
    if not isinstance(msg, dict):
        raise ProtocolError("bad_schema", "message must be a JSON object")
    kind = msg.get("type")
    if kind not in _VALIDATORS:
        raise ProtocolError("unknown_type", repr(kind))
    _VALIDATORS[kind](msg)
    return msg


def error_frame(code: str, detail: str = "") -> dict:
    return {"type": "error", "code": code, "detail": detail}
