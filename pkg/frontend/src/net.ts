// Socket wrapper: decode incoming frames, hand them to the state, retry
// after a second when the server goes away.

import { ClientMsg, decodeServer, encode, ServerMsg } from "./protocol.js";

export interface NetHooks {
  onMessage(msg: ServerMsg): void;
  onStatus(open: boolean): void;
}

export class DriveSocket {
  private url: string;
  private hooks: NetHooks;
  private ws: WebSocket | null = null;
  private closed = false;

  constructor(url: string, hooks: NetHooks) {
    this.url = url;
    this.hooks = hooks;
    this.open();
  }

  private open(): void {
    const ws = new WebSocket(this.url);
    this.ws = ws;
    ws.onopen = () => this.hooks.onStatus(true);
    ws.onclose = () => {
      this.hooks.onStatus(false);
      if (!this.closed) setTimeout(() => this.open(), 1000);
    };
    ws.onerror = () => {
      // onclose follows and drives the retry
    };
    ws.onmessage = (ev: MessageEvent<string>) => {
      let msg: ServerMsg;
      try {
        msg = decodeServer(ev.data);
      } catch (e) {
        console.warn("dropped bad frame:", e);
        return;
      }
      this.hooks.onMessage(msg);
    };
  }

  send(msg: ClientMsg): boolean {
    if (!this.ws || this.ws.readyState !== WebSocket.OPEN) return false;
    this.ws.send(encode(msg));
    return true;
  }

  shutdown(): void {
    this.closed = true;
    if (this.ws) this.ws.close();
  }
}
