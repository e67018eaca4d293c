// Wire protocol for the drive server, mirroring PROTOCOL.md exactly.
// Schemas are strict both ways: every listed key required, unknown keys
// rejected, canonical encoding is sorted keys with no whitespace.

export type Subtask = "lanefollow" | "left" | "right" | "straight";

export interface HelloMsg {
  type: "hello";
  protocol: number;
  net_id: string;
  town: string;
  dt: number;
  lane_width: number;
  nodes: [number, number][];
  roads: [number, number][][];
}

export interface TelemetryMsg {
  type: "telemetry";
  tick: number;
  pose: [number, number, number];
  speed: number;
  subtask: Subtask;
  votes: number[];
  instruction: string | null;
  net_id: string;
  trail: [number, number, number][];
}

export interface ErrorMsg {
  type: "error";
  code: string;
  detail: string;
}

export type ServerMsg = HelloMsg | TelemetryMsg | ErrorMsg;

export interface InstructionMsg {
  type: "instruction";
  text: string;
  ts: number;
}

export interface ResetMsg {
  type: "reset";
  seed?: number;
}

export type ClientMsg = InstructionMsg | ResetMsg;

export class ProtocolError extends Error {
  code: string;
  constructor(code: string, detail: string) {
    super(`${code}: ${detail}`);
    this.code = code;
  }
}

const SUBTASKS: Subtask[] = ["lanefollow", "left", "right", "straight"];

function isNum(v: unknown): v is number {
  return typeof v === "number" && Number.isFinite(v);
}

function isPair(v: unknown): v is [number, number] {
  return Array.isArray(v) && v.length === 2 && v.every(isNum);
}

function isPose(v: unknown): v is [number, number, number] {
  return Array.isArray(v) && v.length === 3 && v.every(isNum);
}

// Required-key check shared by every schema: all present, nothing extra.
function checkKeys(obj: Record<string, unknown>, keys: string[]): void {
  for (const k of keys) {
    if (!(k in obj)) throw new ProtocolError("missing_field", k);
  }
  for (const k of Object.keys(obj)) {
    if (!keys.includes(k)) throw new ProtocolError("unknown_field", k);
  }
}

function bad(field: string): never {
  throw new ProtocolError("bad_value", field);
}

function decodeHello(o: Record<string, unknown>): HelloMsg {
  checkKeys(o, ["type", "protocol", "net_id", "town", "dt", "lane_width",
                "nodes", "roads"]);
  if (o.protocol !== 1) bad("protocol");
  if (typeof o.net_id !== "string") bad("net_id");
  if (typeof o.town !== "string") bad("town");
  if (!isNum(o.dt) || o.dt <= 0) bad("dt");
  if (!isNum(o.lane_width) || o.lane_width <= 0) bad("lane_width");
  if (!Array.isArray(o.nodes) || !o.nodes.every(isPair)) bad("nodes");
  if (!Array.isArray(o.roads) ||
      !o.roads.every((r) => Array.isArray(r) && r.length >= 2 && r.every(isPair)))
    bad("roads");
  return o as unknown as HelloMsg;
}

function decodeTelemetry(o: Record<string, unknown>): TelemetryMsg {
  checkKeys(o, ["type", "tick", "pose", "speed", "subtask", "votes",
                "instruction", "net_id", "trail"]);
  if (!isNum(o.tick) || o.tick < 0 || !Number.isInteger(o.tick)) bad("tick");
  if (!isPose(o.pose)) bad("pose");
  if (!isNum(o.speed)) bad("speed");
  if (!SUBTASKS.includes(o.subtask as Subtask)) bad("subtask");
  if (!Array.isArray(o.votes) || !o.votes.every((v) => v === 0 || v === 1))
    bad("votes");
  if (o.instruction !== null && typeof o.instruction !== "string")
    bad("instruction");
  if (typeof o.net_id !== "string") bad("net_id");
  if (!Array.isArray(o.trail) || o.trail.length > 100 || !o.trail.every(isPose))
    bad("trail");
  return o as unknown as TelemetryMsg;
}

function decodeError(o: Record<string, unknown>): ErrorMsg {
  checkKeys(o, ["type", "code", "detail"]);
  if (typeof o.code !== "string") bad("code");
  if (typeof o.detail !== "string") bad("detail");
  return o as unknown as ErrorMsg;
}

export function decodeServer(raw: string): ServerMsg {
  let o: unknown;
  try {
    o = JSON.parse(raw);
  } catch {
    throw new ProtocolError("bad_json", "unparseable frame");
  }
  if (typeof o !== "object" || o === null || Array.isArray(o))
    throw new ProtocolError("bad_schema", "frame is not an object");
  const obj = o as Record<string, unknown>;
  switch (obj.type) {
    case "hello": return decodeHello(obj);
    case "telemetry": return decodeTelemetry(obj);
    case "error": return decodeError(obj);
    default:
      throw new ProtocolError("unknown_type", String(obj.type));
  }
}

// Canonical JSON: keys sorted at every level, no whitespace. Matches what
// the server emits, so encode(decode(frame)) reproduces the frame.
function canonical(v: unknown): string {
  if (v === null || typeof v === "number" || typeof v === "boolean")
    return JSON.stringify(v);
  if (typeof v === "string") return JSON.stringify(v);
  if (Array.isArray(v)) return "[" + v.map(canonical).join(",") + "]";
  const obj = v as Record<string, unknown>;
  const parts = Object.keys(obj).sort().map(
    (k) => JSON.stringify(k) + ":" + canonical(obj[k]));
  return "{" + parts.join(",") + "}";
}

export function encode(msg: ServerMsg | ClientMsg): string {
  return canonical(msg);
}

export function instructionMsg(text: string, ts: number): InstructionMsg {
  return { type: "instruction", text, ts };
}

export function resetMsg(seed?: number): ResetMsg {
  return seed === undefined ? { type: "reset" } : { type: "reset", seed };
}
