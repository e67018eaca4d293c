// Canvas drawing. Everything here takes a Draw2D so tests can hand in a
// recording stub instead of a real context; CanvasRenderingContext2D
// satisfies the interface structurally.

import { HelloMsg, TelemetryMsg } from "./protocol.js";

export interface Draw2D {
  clearRect(x: number, y: number, w: number, h: number): void;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  closePath(): void;
  stroke(): void;
  fill(): void;
  save(): void;
  restore(): void;
  translate(x: number, y: number): void;
  rotate(a: number): void;
  lineWidth: number;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  fillStyle: string | CanvasGradient | CanvasPattern;
  globalAlpha: number;
  lineCap: string;
}

// World-to-screen fit: uniform scale, y flipped (world +y up), 30px margin.
export interface Viewport {
  scale: number;
  ox: number;
  oy: number;
}

export function fitViewport(hello: HelloMsg, w: number, h: number): Viewport {
  let xMin = Infinity, xMax = -Infinity, yMin = Infinity, yMax = -Infinity;
  const take = (p: [number, number]) => {
    if (p[0] < xMin) xMin = p[0];
    if (p[0] > xMax) xMax = p[0];
    if (p[1] < yMin) yMin = p[1];
    if (p[1] > yMax) yMax = p[1];
  };
  for (const n of hello.nodes) take(n);
  for (const road of hello.roads) for (const p of road) take(p);
  if (!Number.isFinite(xMin)) {
    return { scale: 1, ox: w / 2, oy: h / 2 };
  }
  const margin = 30;
  const spanX = Math.max(xMax - xMin, 1e-6);
  const spanY = Math.max(yMax - yMin, 1e-6);
  const scale = Math.min((w - 2 * margin) / spanX, (h - 2 * margin) / spanY);
  return {
    scale,
    ox: w / 2 - scale * (xMin + xMax) / 2,
    oy: h / 2 + scale * (yMin + yMax) / 2,
  };
}

export function toScreen(vp: Viewport, x: number, y: number): [number, number] {
  return [vp.ox + vp.scale * x, vp.oy - vp.scale * y];
}

export function drawNetwork(ctx: Draw2D, hello: HelloMsg, vp: Viewport): void {
  ctx.lineCap = "round";
  ctx.strokeStyle = "#3c4454";
  ctx.lineWidth = Math.max(2, 2 * hello.lane_width * vp.scale);
  for (const road of hello.roads) {
    ctx.beginPath();
    const [x0, y0] = toScreen(vp, road[0][0], road[0][1]);
    ctx.moveTo(x0, y0);
    for (let i = 1; i < road.length; i++) {
      const [x, y] = toScreen(vp, road[i][0], road[i][1]);
      ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
  // center lines, thin
  ctx.strokeStyle = "#5a6478";
  ctx.lineWidth = 1;
  for (const road of hello.roads) {
    ctx.beginPath();
    const [x0, y0] = toScreen(vp, road[0][0], road[0][1]);
    ctx.moveTo(x0, y0);
    for (let i = 1; i < road.length; i++) {
      const [x, y] = toScreen(vp, road[i][0], road[i][1]);
      ctx.lineTo(x, y);
    }
    ctx.stroke();
  }
  ctx.fillStyle = "#8b95a8";
  for (const node of hello.nodes) {
    const [x, y] = toScreen(vp, node[0], node[1]);
    ctx.beginPath();
    ctx.arc(x, y, 3.5, 0, Math.PI * 2);
    ctx.fill();
  }
}

export function drawTrail(ctx: Draw2D, frame: TelemetryMsg, vp: Viewport): void {
  if (frame.trail.length < 2) return;
  ctx.strokeStyle = "#4ea1ff";
  ctx.lineWidth = 2;
  ctx.globalAlpha = 0.7;
  ctx.beginPath();
  const [x0, y0] = toScreen(vp, frame.trail[0][0], frame.trail[0][1]);
  ctx.moveTo(x0, y0);
  for (let i = 1; i < frame.trail.length; i++) {
    const [x, y] = toScreen(vp, frame.trail[i][0], frame.trail[i][1]);
    ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.globalAlpha = 1;
}

export function drawVehicle(ctx: Draw2D, frame: TelemetryMsg, vp: Viewport): void {
  const [x, y] = toScreen(vp, frame.pose[0], frame.pose[1]);
  ctx.save();
  ctx.translate(x, y);
  ctx.rotate(-frame.pose[2]);      // screen y is down
  ctx.fillStyle = "#ffd24e";
  ctx.beginPath();
  ctx.moveTo(10, 0);
  ctx.lineTo(-7, 5.5);
  ctx.lineTo(-7, -5.5);
  ctx.closePath();
  ctx.fill();
  ctx.restore();
}

export function drawScene(ctx: Draw2D, w: number, h: number,
                          hello: HelloMsg | null,
                          frame: TelemetryMsg | null): void {
  ctx.fillStyle = "#14171e";
  ctx.fillRect(0, 0, w, h);
  if (hello === null) return;
  const vp = fitViewport(hello, w, h);
  drawNetwork(ctx, hello, vp);
  if (frame !== null) {
    drawTrail(ctx, frame, vp);
    drawVehicle(ctx, frame, vp);
  }
}
