import { describe, expect, it } from "vitest";

import { HelloMsg, TelemetryMsg } from "../src/protocol.js";
import { Draw2D, drawScene, fitViewport, toScreen } from "../src/render.js";

// Records every path op so assertions can count what was drawn.
class StubCtx implements Draw2D {
  lineWidth = 1;
  strokeStyle = "";
  fillStyle = "";
  globalAlpha = 1;
  lineCap = "";
  calls: { op: string; args: number[] }[] = [];
  private log(op: string, ...args: number[]) {
    this.calls.push({ op, args });
  }
  clearRect(x: number, y: number, w: number, h: number) { this.log("clearRect", x, y, w, h); }
  fillRect(x: number, y: number, w: number, h: number) { this.log("fillRect", x, y, w, h); }
  beginPath() { this.log("beginPath"); }
  moveTo(x: number, y: number) { this.log("moveTo", x, y); }
  lineTo(x: number, y: number) { this.log("lineTo", x, y); }
  arc(x: number, y: number, r: number, a0: number, a1: number) { this.log("arc", x, y, r, a0, a1); }
  closePath() { this.log("closePath"); }
  stroke() { this.log("stroke"); }
  fill() { this.log("fill"); }
  save() { this.log("save"); }
  restore() { this.log("restore"); }
  translate(x: number, y: number) { this.log("translate", x, y); }
  rotate(a: number) { this.log("rotate", a); }
  count(op: string): number {
    return this.calls.filter((c) => c.op === op).length;
  }
}

function hello(nNodes: number): HelloMsg {
  const nodes: [number, number][] = [];
  for (let i = 0; i < nNodes; i++) nodes.push([i * 20, (i % 3) * 15]);
  return {
    type: "hello", protocol: 1, net_id: "n", town: "A", dt: 0.1,
    lane_width: 3.5, nodes,
    roads: [[[0, 0], [20, 0]], [[20, 0], [20, 15], [40, 15]]],
  };
}

const frame: TelemetryMsg = {
  type: "telemetry", tick: 7, pose: [10, 5, 0.3], speed: 3,
  subtask: "left", votes: [0, 1], instruction: "left here",
  net_id: "n", trail: [[8, 5, 0.3], [9, 5, 0.3], [10, 5, 0.3]],
};

describe("renderer", () => {
  it("hello with 10 nodes draws 10 junction dots", () => {
    const ctx = new StubCtx();
    drawScene(ctx, 640, 480, hello(10), null);
    expect(ctx.count("arc")).toBe(10);
  });

  it("every road polyline is stroked, twice (asphalt + center line)", () => {
    const ctx = new StubCtx();
    const h = hello(4);
    drawScene(ctx, 640, 480, h, null);
    // per road: one moveTo each pass; lineTo count = total segment count
    const segs = h.roads.reduce((acc, r) => acc + r.length - 1, 0);
    expect(ctx.count("moveTo")).toBe(2 * h.roads.length);
    expect(ctx.count("lineTo")).toBe(2 * segs);
  });

  it("with a frame the vehicle triangle and trail appear", () => {
    const ctx = new StubCtx();
    drawScene(ctx, 640, 480, hello(4), frame);
    expect(ctx.count("closePath")).toBe(1);               // the triangle
    expect(ctx.count("rotate")).toBe(1);
    const rot = ctx.calls.find((c) => c.op === "rotate")!;
    expect(rot.args[0]).toBeCloseTo(-0.3);                // heading flipped
    // beyond the network's 4: one moveTo for the trail, one for the triangle
    expect(ctx.count("moveTo")).toBe(2 * 2 + 2);
  });

  it("no hello means an empty background only", () => {
    const ctx = new StubCtx();
    drawScene(ctx, 640, 480, null, null);
    expect(ctx.count("fillRect")).toBe(1);
    expect(ctx.count("arc")).toBe(0);
    expect(ctx.count("stroke")).toBe(0);
  });

  it("viewport maps the bounding box inside the margin, y up", () => {
    const h = hello(4);             // x in [0, 60], y in [0, 30]
    const vp = fitViewport(h, 640, 480);
    const pts: [number, number][] = [];
    for (const n of h.nodes) pts.push(toScreen(vp, n[0], n[1]));
    for (const r of h.roads) for (const p of r) pts.push(toScreen(vp, p[0], p[1]));
    for (const [sx, sy] of pts) {
      expect(sx).toBeGreaterThanOrEqual(29);
      expect(sx).toBeLessThanOrEqual(611);
      expect(sy).toBeGreaterThanOrEqual(29);
      expect(sy).toBeLessThanOrEqual(451);
    }
    const [, yLow] = toScreen(vp, 0, 0);
    const [, yHigh] = toScreen(vp, 0, 15);
    expect(yHigh).toBeLessThan(yLow);          // larger world y is higher up
  });
});
