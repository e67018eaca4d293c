// Console entry point: wires the socket into the view state and repaints
// on animation frames, decoupled from the 10 Hz telemetry.

import { DriveSocket } from "./net.js";
import { instructionMsg, resetMsg } from "./protocol.js";
import { drawScene } from "./render.js";
import { applyServer, initialState, recordSend, setConn } from "./state.js";

const canvas = document.getElementById("map") as HTMLCanvasElement;
const ctx = canvas.getContext("2d");
if (!ctx) throw new Error("no 2d context");

const banner = document.getElementById("banner") as HTMLDivElement;
const badge = document.getElementById("badge") as HTMLSpanElement;
const readout = document.getElementById("readout") as HTMLSpanElement;
const activeLine = document.getElementById("active") as HTMLDivElement;
const historyList = document.getElementById("history") as HTMLUListElement;
const form = document.getElementById("say") as HTMLFormElement;
const input = document.getElementById("text") as HTMLInputElement;
const resetBtn = document.getElementById("reset") as HTMLButtonElement;

const st = initialState();

const wsUrl = `ws://${location.host}/ws`;
const sock = new DriveSocket(wsUrl, {
  onMessage: (msg) => applyServer(st, msg),
  onStatus: (open) => setConn(st, open ? "open" : "closed"),
});

form.addEventListener("submit", (ev) => {
  ev.preventDefault();
  const text = input.value.trim();
  if (!text) return;                     // blank is rejected server-side too
  const msg = instructionMsg(text, Date.now() / 1000);
  if (sock.send(msg)) {
    recordSend(st, text, msg.ts);
    input.value = "";
  }
});

resetBtn.addEventListener("click", () => {
  sock.send(resetMsg());
});

function resize(): void {
  const dpr = window.devicePixelRatio || 1;
  canvas.width = Math.round(canvas.clientWidth * dpr);
  canvas.height = Math.round(canvas.clientHeight * dpr);
  ctx!.setTransform(dpr, 0, 0, dpr, 0, 0);
}
window.addEventListener("resize", resize);
resize();

function repaintPanel(): void {
  banner.className = st.conn;
  banner.textContent =
    st.conn === "open" ? (st.hello ? `${st.hello.town} live` : "connected")
    : st.conn === "closed" ? "disconnected, retrying"
    : "connecting";

  if (st.frame) {
    badge.textContent = st.frame.subtask;
    badge.className = `sub ${st.frame.subtask}`;
    const votes = st.frame.votes.join("");
    readout.textContent =
      `tick ${st.frame.tick}  ${st.frame.speed.toFixed(1)} m/s  votes ${votes}`;
    activeLine.textContent = st.frame.instruction ?? "(lanefollow, no instruction)";
  }

  // rebuild the short history list; newest on top
  historyList.innerHTML = "";
  for (let i = st.history.length - 1; i >= Math.max(0, st.history.length - 8); i--) {
    const entry = st.history[i];
    const li = document.createElement("li");
    li.className = entry.status;
    li.textContent = `${entry.text}  [${entry.status}]`;
    historyList.appendChild(li);
  }
}

function frameLoop(): void {
  const w = canvas.clientWidth;
  const h = canvas.clientHeight;
  drawScene(ctx!, w, h, st.hello, st.frame);
  repaintPanel();
  requestAnimationFrame(frameLoop);
}
requestAnimationFrame(frameLoop);

console.log("console up, connecting to", wsUrl);
