"""Protocol and live-service tests with scripted stub policies."""

import json
from dataclasses import dataclass, field

import numpy as np
import pytest
from fastapi.testclient import TestClient

from langdrive.config import RunConfig
from langdrive.server import (PROTOCOL_VERSION, TELEMETRY_FIELDS, TRAIL_CAP,
                              DriveSession, ProtocolError, build_app,
                              decode_message, encode_message)
from langdrive.world.network import build_town


@pytest.fixture(scope="module")
def cfg():
    return RunConfig()


@pytest.fixture(scope="module")
def net(cfg):
    return build_town("A", 0, cfg.world)


# -- scripted stand-ins -----------------------------------------------------

class StubHigh:
    """Returns a scripted pick per invocation; raises past the script end."""

    def __init__(self, picks):
        self.picks = list(picks)
        self.seen = []            # token lists passed to decide

    def init_hidden(self, batch=1):
        return 0

    def decide(self, tokens, grid, prev, hidden, allowed=None):
        if not self.picks:
            raise AssertionError("selector invoked more often than scripted")
        self.seen.append(list(tokens))
        return self.picks.pop(0), hidden


class StubLowAction:
    def init_hidden(self, batch=1):
        return 0

    def act(self, grid, subtask, h):
        return np.array([0.6, 0.0]), h


class StubLowEnd:
    """Votes 0 for `fire_after` ticks of each sub-task, then 1 forever."""

    def __init__(self, fire_after):
        self.fire_after = fire_after
        self.n = 0

    def init_hidden(self, batch=1):
        self.n = 0
        return 0

    def act(self, grid, subtask, h):
        self.n += 1
        return (1.0 if self.n > self.fire_after else 0.0), h


class StubVocab:
    def tokenize(self, text):
        return [hash(w) % 97 + 1 for w in text.split()]


@dataclass
class StubBundle:
    high: StubHigh
    low_action: StubLowAction = field(default_factory=StubLowAction)
    low_end: StubLowEnd = field(default_factory=lambda: StubLowEnd(5))
    vocab: StubVocab = field(default_factory=StubVocab)


def make_session(net, cfg, picks=(), fire_after=5):
    bundle = StubBundle(StubHigh(picks), low_end=StubLowEnd(fire_after))
    return DriveSession(bundle, net, "A", cfg, seed=0)


# -- wire protocol ----------------------------------------------------------

def _fuzz_frame(rng):
    kind = ("hello", "telemetry", "instruction", "reset", "error")[
        int(rng.integers(5))]
    f = float(rng.standard_normal())
    if kind == "hello":
        return {"type": "hello", "protocol": PROTOCOL_VERSION,
                "net_id": f"A-{int(rng.integers(1e6)):x}", "town": "A",
                "dt": 0.1, "lane_width": f + 10,
                "nodes": [[f, -f] for _ in range(int(rng.integers(4)))],
                "roads": [[[0.0, f], [1.0, f]]
                          for _ in range(int(rng.integers(3)))]}
    if kind == "telemetry":
        n = int(rng.integers(TRAIL_CAP + 1))
        return {"type": "telemetry", "tick": int(rng.integers(1e6)),
                "pose": [f, 2 * f, 0.5], "speed": abs(f),
                "subtask": ("lanefollow", "left", "right", "straight")[
                    int(rng.integers(4))],
                "votes": [int(v) for v in rng.integers(0, 2, int(rng.integers(4)))],
                "instruction": None if rng.random() < 0.5 else "turn left",
                "net_id": "A-abc", "trail": [[f, f, 0.0]] * n}
    if kind == "instruction":
        return {"type": "instruction", "text": "go straight then left",
                "ts": abs(f)}
    if kind == "reset":
        return {"type": "reset"} if rng.random() < 0.5 else \
            {"type": "reset", "seed": int(rng.integers(1e6))}
    return {"type": "error", "code": "bad_value", "detail": "x" * int(rng.integers(8))}


def test_roundtrip_identity_fuzz():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        frame = _fuzz_frame(rng)
        text = encode_message(frame)
        assert decode_message(text) == frame
        assert encode_message(decode_message(text)) == text


@pytest.mark.parametrize("text,code", [
    ("{", "bad_json"),
    (b"\xff\xfe", "bad_utf8"),
    ("[1,2]", "bad_schema"),
    ('{"type":"noop"}', "unknown_type"),
    ('{"type":"instruction","ts":1}', "missing_field"),
    ('{"type":"instruction","text":"go","ts":1,"x":2}', "unknown_field"),
    ('{"type":"instruction","text":"  ","ts":1}', "empty_instruction"),
    ('{"type":"reset","seed":true}', "bad_value"),
    ('{"type":"telemetry","tick":-1,"pose":[0,0,0],"speed":0,'
     '"subtask":"lanefollow","votes":[],"instruction":null,'
     '"net_id":"x","trail":[]}', "bad_value"),
])
def test_rejections(text, code):
    with pytest.raises(ProtocolError) as e:
        decode_message(text)
    assert e.value.code == code


def test_telemetry_schema_fields(net, cfg):
    sess = make_session(net, cfg, fire_after=10 ** 9)
    frame = sess.step()
    decode_message(encode_message(frame))
    assert set(frame) == {"type", *TELEMETRY_FIELDS}


# -- session state machine --------------------------------------------------

def test_idle_lanefollows_forever(net, cfg):
    # the scripted selector raises if invoked: idling must never consult it
    sess = make_session(net, cfg, picks=(), fire_after=3)
    last = 0
    for _ in range(1000):
        frame = sess.step()
        assert frame["subtask"] == "lanefollow"
        assert frame["instruction"] is None
        assert frame["tick"] == last + 1
        last = frame["tick"]
    assert len(sess.trail) == TRAIL_CAP


def test_adoption_waits_for_boundary(net, cfg):
    sess = make_session(net, cfg, picks=["left"], fire_after=5)
    frames = [sess.step() for _ in range(3)]
    sess.submit("turn left")                      # mid sub-task
    while not sess._boundary:
        frames.append(sess.step())
    assert all(f["instruction"] is None for f in frames)
    adopt = sess.step()
    assert adopt["instruction"] == "turn left"
    assert adopt["subtask"] == "left"
    assert adopt["votes"] == [0]                  # fresh sub-task window


def test_newest_instruction_wins(net, cfg):
    sess = make_session(net, cfg, picks=["right"], fire_after=5)
    sess.step()
    sess.submit("first request")
    sess.step()
    sess.submit("second request")
    while not sess._boundary:
        sess.step()
    adopt = sess.step()
    assert adopt["instruction"] == "second request"
    assert sess.bundle.high.seen == [StubVocab().tokenize("second request")]


def test_finish_returns_to_idle(net, cfg):
    sess = make_session(net, cfg, picks=["left", "finish"], fire_after=4)
    sess.submit("one turn")
    frames = [sess.step()]
    assert frames[0]["subtask"] == "left"
    while not sess._boundary:
        frames.append(sess.step())
    after = sess.step()                           # finish pick lands here
    assert after["subtask"] == "lanefollow"
    assert after["instruction"] is None
    for _ in range(12):                           # selector stays quiet now
        assert sess.step()["subtask"] == "lanefollow"


def test_reset_respawns(net, cfg):
    sess = make_session(net, cfg, picks=["left"], fire_after=50)
    for _ in range(30):
        sess.step()
    sess.submit("pending text")
    sess.reset(seed=7)
    frame = sess.step()
    assert frame["tick"] == 1
    assert frame["instruction"] is None
    assert len(frame["trail"]) == 1
    assert sess.pending is None


# -- websocket service ------------------------------------------------------

def _client(net, cfg, monkeypatch=None, **kw):
    sess = make_session(net, cfg, **kw)
    app = build_app(sess, real_time_factor=0.0)
    return TestClient(app)


def _recv(ws):
    return decode_message(ws.receive_text())


def _next_of_type(ws, kind, limit=500):
    for _ in range(limit):
        msg = _recv(ws)
        if msg["type"] == kind:
            return msg
    raise AssertionError(f"no {kind} frame within {limit} messages")


def test_ws_hello_then_monotone_telemetry(net, cfg):
    with _client(net, cfg, fire_after=10 ** 9).websocket_connect("/ws") as ws:
        hello = _recv(ws)
        assert hello["type"] == "hello"
        assert hello["town"] == "A"
        assert len(hello["nodes"]) == len(net.nodes)
        assert len(hello["roads"]) == len(net.roads)
        ticks = []
        for _ in range(20):
            frame = _recv(ws)
            assert frame["type"] == "telemetry"
            assert frame["net_id"] == hello["net_id"]
            ticks.append(frame["tick"])
        assert all(b > a for a, b in zip(ticks, ticks[1:]))


def test_ws_malformed_gets_error_and_stream_survives(net, cfg):
    with _client(net, cfg, fire_after=10 ** 9).websocket_connect("/ws") as ws:
        _recv(ws)
        ws.send_text("this is not json")
        err = _next_of_type(ws, "error")
        assert err["code"] == "bad_json"
        ws.send_text(encode_message(
            {"type": "instruction", "text": " ", "ts": 0.0}))
        err = _next_of_type(ws, "error")
        assert err["code"] == "empty_instruction"
        assert _next_of_type(ws, "telemetry")["tick"] > 0


def test_ws_client_cannot_send_server_frames(net, cfg):
    with _client(net, cfg, fire_after=10 ** 9).websocket_connect("/ws") as ws:
        _recv(ws)
        ws.send_text(encode_message({"type": "error", "code": "x", "detail": ""}))
        assert _next_of_type(ws, "error")["code"] == "unexpected_type"


def test_ws_instruction_adopted_only_at_boundary(net, cfg, monkeypatch):
    import langdrive.server.app as appmod
    monkeypatch.setattr(appmod, "TELEMETRY_QUEUE", 10 ** 6)   # lossless stream
    with _client(net, cfg, picks=["left"], fire_after=40).websocket_connect(
            "/ws") as ws:
        _recv(ws)
        first = _next_of_type(ws, "telemetry")
        ws.send_text(encode_message(
            {"type": "instruction", "text": "take the next left", "ts": 1.0}))
        seen_before = []
        frame = _next_of_type(ws, "telemetry")
        while frame["instruction"] is None:
            seen_before.append(frame)
            frame = _next_of_type(ws, "telemetry")
        # gapless view of the flip: adoption exactly at the vote boundary
        assert frame["instruction"] == "take the next left"
        assert frame["subtask"] == "left"
        assert frame["votes"] == [0]
        assert frame["tick"] == seen_before[-1]["tick"] + 1
        assert sum(seen_before[-1]["votes"]) >= 2
        assert all(f["subtask"] == "lanefollow"
                   for f in [first, *seen_before])


def test_ws_disconnect_pauses_and_resumes(net, cfg):
    client = _client(net, cfg, fire_after=10 ** 9)
    with client.websocket_connect("/ws") as ws:
        _recv(ws)
        seen = _next_of_type(ws, "telemetry")["tick"]
    paused = client.app.state.session.state.tick
    with client.websocket_connect("/ws") as ws:
        hello = _recv(ws)
        assert hello["type"] == "hello"
        frame = _next_of_type(ws, "telemetry")
        assert frame["tick"] > seen
        assert frame["tick"] >= paused + 1


def test_ws_reset_message(net, cfg):
    with _client(net, cfg, fire_after=10 ** 9).websocket_connect("/ws") as ws:
        _recv(ws)
        before = _next_of_type(ws, "telemetry")["tick"]
        assert before > 0
        ws.send_text(encode_message({"type": "reset", "seed": 5}))
        hello = _next_of_type(ws, "hello")
        assert hello["protocol"] == PROTOCOL_VERSION
        for _ in range(500):
            frame = _next_of_type(ws, "telemetry")
            if frame["tick"] <= before:
                break
        else:
            raise AssertionError("tick never restarted after reset")


def test_static_ui_mount(net, cfg, tmp_path):
    (tmp_path / "index.html").write_text("<!doctype html><title>console</title>")
    sess = make_session(net, cfg, fire_after=10 ** 9)
    app = build_app(sess, real_time_factor=0.0, ui_dir=str(tmp_path))
    client = TestClient(app)
    page = client.get("/")
    assert page.status_code == 200
    assert "console" in page.text
    with client.websocket_connect("/ws") as ws:     # mount must not shadow /ws
        assert _recv(ws)["type"] == "hello"
