// Client-side view of the session, rebuilt purely from what the server
// sends: hello gives the map, telemetry gives everything that moves. The
// only client-owned data is the list of instructions the user typed.

import { ErrorMsg, HelloMsg, ServerMsg, TelemetryMsg } from "./protocol.js";

export type ConnStatus = "connecting" | "open" | "closed";
export type SendStatus = "pending" | "active" | "superseded";

export interface SentInstruction {
  text: string;
  ts: number;
  status: SendStatus;
}

export interface ViewState {
  conn: ConnStatus;
  hello: HelloMsg | null;
  frame: TelemetryMsg | null;
  lastTick: number;
  history: SentInstruction[];
  lastError: ErrorMsg | null;
  staleDropped: number;
}

export function initialState(): ViewState {
  return {
    conn: "connecting",
    hello: null,
    frame: null,
    lastTick: -1,
    history: [],
    lastError: null,
    staleDropped: 0,
  };
}

function latestPending(st: ViewState): SentInstruction | null {
  for (let i = st.history.length - 1; i >= 0; i--) {
    const entry = st.history[i];
    if (entry.status === "pending") return entry;
  }
  return null;
}

export function applyServer(st: ViewState, msg: ServerMsg): void {
  if (msg.type === "hello") {
    // Mid-connection hello means a reset: the server dropped whatever was
    // queued. A hello on a fresh connection leaves pending sends alone.
    if (st.conn === "open" && st.hello !== null) {
      for (const entry of st.history) {
        if (entry.status === "pending") entry.status = "superseded";
      }
    }
    st.hello = msg;
    st.frame = null;
    st.lastTick = -1;
    st.conn = "open";
    return;
  }
  if (msg.type === "telemetry") {
    if (msg.tick <= st.lastTick) {
      st.staleDropped += 1;          // out of order, ignore
      return;
    }
    st.lastTick = msg.tick;
    st.frame = msg;
    if (msg.instruction !== null) {
      // The echoed text marks the matching send as adopted.
      for (let i = st.history.length - 1; i >= 0; i--) {
        const entry = st.history[i];
        if (entry.text === msg.instruction && entry.status === "pending") {
          entry.status = "active";
          break;
        }
      }
    }
    return;
  }
  st.lastError = msg;
}

export function recordSend(st: ViewState, text: string, ts: number): void {
  const prev = latestPending(st);
  if (prev !== null) prev.status = "superseded";
  st.history.push({ text, ts, status: "pending" });
}

export function setConn(st: ViewState, conn: ConnStatus): void {
  st.conn = conn;
}
