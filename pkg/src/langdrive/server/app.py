"""Websocket service around a DriveSession.

One session per server process; it survives reconnects, so a dropped client
resumes where the vehicle paused. Per connection three concerns share the
event loop: the simulation ticker (owns the session), a sender draining a
bounded drop-oldest telemetry queue, and the receive loop (instructions and
resets are applied between ticks, never concurrently with one).
"""

from __future__ import annotations

import asyncio
from collections import deque

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from ..config import RunConfig
from ..world.network import build_town
from .protocol import ProtocolError, decode_message, encode_message, error_frame
from .session import DriveSession

TELEMETRY_QUEUE = 32


def build_app(session: DriveSession, real_time_factor: float = 1.0,
              ui_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="langdrive")
    app.state.session = session
    # factor N runs the 10 Hz loop N times faster; 0 means unthrottled
    period = (session.wcfg.dt / real_time_factor
              if real_time_factor > 0 else 0.0)

    @app.websocket("/ws")
    async def ws(sock: WebSocket):
        sess: DriveSession = app.state.session
        await sock.accept()
        await sock.send_text(encode_message(sess.hello()))
        outbox: deque = deque(maxlen=TELEMETRY_QUEUE)
        wake = asyncio.Event()

        async def ticker():
            while True:
                outbox.append(sess.step())
                wake.set()
                await asyncio.sleep(period)

        async def sender():
            while True:
                await wake.wait()
                wake.clear()
                while outbox:
                    await sock.send_text(encode_message(outbox.popleft()))

        tasks = [asyncio.create_task(ticker()), asyncio.create_task(sender())]
        try:
            while True:
                text = await sock.receive_text()
                try:
                    msg = decode_message(text)
                except ProtocolError as e:
                    await sock.send_text(encode_message(
                        error_frame(e.code, e.detail)))
                    continue
                if msg["type"] == "instruction":
                    sess.submit(msg["text"])
                elif msg["type"] == "reset":
                    sess.reset(msg.get("seed"))
                    await sock.send_text(encode_message(sess.hello()))
                else:
                    await sock.send_text(encode_message(error_frame(
                        "unexpected_type",
                        f"{msg['type']} frames flow server to client")))
        except WebSocketDisconnect:
            pass
        finally:
            # simulation pauses here; session state stays for the next client
            for t in tasks:
                t.cancel()

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles
        # mounted last so /ws keeps winning
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app


def serve(bundle, town: str = "A", port: int = 8700,
          cfg: RunConfig | None = None, real_time_factor: float = 1.0,
          seed: int = 0, ui_dir: str | None = None):
    """Run the service until interrupted."""
    import uvicorn
    cfg = cfg or RunConfig()
    net = build_town(town, cfg.train.seed, cfg.world)
    session = DriveSession(bundle, net, town, cfg, seed=seed)
    app = build_app(session, real_time_factor, ui_dir=ui_dir)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
