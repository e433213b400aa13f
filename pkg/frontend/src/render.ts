/**
 * Canvas drawing: scene panes (workspace, coils, actuator, target,
 * load) and telemetry strip charts.  Drawing goes through the minimal
 * Canvas2D surface below so the renderer can be exercised with a
 * recording stub in tests.
 */

import { Pane, worldToPixel } from "./projection.js";
import { RingBuffer } from "./telemetry.js";
import { ViewModel } from "./viewmodel.js";

export interface Canvas2D {
  fillStyle: string;
  strokeStyle: string;
  lineWidth: number;
  font: string;
  textAlign: string;
  globalAlpha: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  strokeRect(x: number, y: number, w: number, h: number): void;
  clearRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  arc(x: number, y: number, r: number, a0: number, a1: number): void;
  stroke(): void;
  fill(): void;
  fillText(text: string, x: number, y: number): void;
  setLineDash(pattern: number[]): void;
  save(): void;
  restore(): void;
}

const COLORS = {
  background: "#10141a",
  workspace: "#3a4656",
  coilPositive: "#e0a030",
  coilNegative: "#4090e0",
  actuator: "#f0f0f0",
  load: "#70c070",
  targetActive: "#50d080",
  targetPending: "#d0d050",
  chart: "#80b0ff",
  text: "#c8d0dc",
  banner: "#e05050",
};

function circle(ctx: Canvas2D, x: number, y: number, r: number): void {
  ctx.beginPath();
  ctx.arc(x, y, r, 0, 2 * Math.PI);
}

function drawPane(
  ctx: Canvas2D,
  pane: Pane,
  view: ViewModel,
  interpolated: number[] | null,
): void {
  ctx.strokeStyle = COLORS.workspace;
  ctx.lineWidth = 1.5;
  ctx.setLineDash([]);
  ctx.strokeRect(pane.left, pane.top, pane.width, pane.height);
  ctx.fillStyle = COLORS.text;
  ctx.font = "12px sans-serif";
  ctx.textAlign = "left";
  ctx.fillText(pane.name, pane.left + 4, pane.top + 14);

  const hello = view.hello;
  if (!hello) return;
  for (const coil of hello.coils) {
    const [cx, cy] = worldToPixel(pane, coil.position);
    ctx.fillStyle = coil.polarity >= 0 ? COLORS.coilPositive : COLORS.coilNegative;
    circle(ctx, cx, cy, 7);
    ctx.fill();
    const [ax, ay] = [coil.axis[pane.axisH] ?? 0, coil.axis[pane.axisV] ?? 0];
    ctx.strokeStyle = ctx.fillStyle;
    ctx.beginPath();
    ctx.moveTo(cx, cy);
    ctx.lineTo(cx + 16 * ax, cy - 16 * ay);
    ctx.stroke();
  }

  const state = view.latest;
  if (!state) return;

  // target marker: solid once acked, dashed while a set_target is pending
  const pendingTarget = [...view.pending.values()].find(
    (p) => p.cmd.type === "set_target",
  );
  const [tx, ty] = worldToPixel(pane, state.target);
  ctx.strokeStyle = COLORS.targetActive;
  ctx.lineWidth = 1.5;
  circle(ctx, tx, ty, 6);
  ctx.stroke();
  ctx.beginPath();
  ctx.moveTo(tx - 9, ty);
  ctx.lineTo(tx + 9, ty);
  ctx.moveTo(tx, ty - 9);
  ctx.lineTo(tx, ty + 9);
  ctx.stroke();
  if (pendingTarget && pendingTarget.cmd.type === "set_target") {
    const [px, py] = worldToPixel(pane, pendingTarget.cmd.pos);
    ctx.strokeStyle = COLORS.targetPending;
    ctx.setLineDash([3, 3]);
    circle(ctx, px, py, 6);
    ctx.stroke();
    ctx.setLineDash([]);
  }

  const pos = interpolated ?? state.pos;
  const [bx, by] = worldToPixel(pane, pos);
  ctx.fillStyle = COLORS.actuator;
  circle(ctx, bx, by, 5);
  ctx.fill();
  if (state.load_g > 0) {
    ctx.fillStyle = COLORS.load;
    circle(ctx, bx, by + 8, 3);
    ctx.fill();
  }
}

function drawStrip(
  ctx: Canvas2D,
  buffer: RingBuffer,
  label: string,
  left: number,
  top: number,
  width: number,
  height: number,
): void {
  ctx.strokeStyle = COLORS.workspace;
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.strokeRect(left, top, width, height);
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px sans-serif";
  ctx.textAlign = "left";
  const latest = buffer.latest();
  const suffix = latest === undefined ? "" : ` ${latest.toFixed(3)}`;
  ctx.fillText(label + suffix, left + 4, top + 12);

  const samples = buffer.window();
  if (samples.length < 2) return;
  let lo = Infinity;
  let hi = -Infinity;
  for (const s of samples) {
    lo = Math.min(lo, s.v);
    hi = Math.max(hi, s.v);
  }
  if (hi - lo < 1e-12) {
    lo -= 0.5;
    hi += 0.5;
  }
  const t0 = samples[0].t;
  const t1 = samples[samples.length - 1].t;
  const span = Math.max(t1 - t0, 1e-9);
  ctx.strokeStyle = COLORS.chart;
  ctx.beginPath();
  samples.forEach((s, i) => {
    const x = left + ((s.t - t0) / span) * width;
    const y = top + height - ((s.v - lo) / (hi - lo)) * height;
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  });
  ctx.stroke();
}

function drawCurrents(
  ctx: Canvas2D,
  view: ViewModel,
  left: number,
  top: number,
  width: number,
  height: number,
): void {
  ctx.strokeStyle = COLORS.workspace;
  ctx.strokeRect(left, top, width, height);
  ctx.fillStyle = COLORS.text;
  ctx.font = "11px sans-serif";
  ctx.fillText("currents", left + 4, top + 12);
  const state = view.latest;
  if (!state || state.currents.length === 0) return;
  let peak = 0;
  for (const c of state.currents) peak = Math.max(peak, Math.abs(c));
  if (peak === 0) peak = 1;
  const barWidth = width / state.currents.length;
  state.currents.forEach((c, i) => {
    const frac = c / peak;
    const mid = top + height / 2;
    ctx.fillStyle = frac >= 0 ? COLORS.coilPositive : COLORS.coilNegative;
    const barHeight = Math.abs(frac) * (height / 2 - 4);
    const y = frac >= 0 ? mid - barHeight : mid;
    ctx.fillRect(left + i * barWidth + 4, y, barWidth - 8, barHeight);
  });
}

/** Draw the whole frame: panes, strip charts, status line. */
export function renderFrame(
  ctx: Canvas2D,
  width: number,
  height: number,
  sceneHeight: number,
  view: ViewModel,
  panes: Pane[],
  interpolated: number[] | null,
): void {
  ctx.fillStyle = COLORS.background;
  ctx.fillRect(0, 0, width, height);

  if (!view.hello) {
    ctx.fillStyle = COLORS.text;
    ctx.font = "14px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("waiting for server…", width / 2, height / 2);
    return;
  }
  for (const pane of panes) drawPane(ctx, pane, view, interpolated);

  const chartTop = sceneHeight;
  const chartHeight = 64;
  const chartWidth = width - 2 * 24;
  const rows: [RingBuffer, string][] = view.errorAxes.map((buf, i) => [
    buf,
    `error ${["x", "y", "z"][i] ?? i} (m)`,
  ]);
  rows.push([view.speed, "speed (mm/s)"]);
  rows.forEach(([buf, label], i) => {
    drawStrip(ctx, buf, label, 24, chartTop + i * (chartHeight + 8), chartWidth, chartHeight);
  });
  drawCurrents(
    ctx,
    view,
    24,
    chartTop + rows.length * (chartHeight + 8),
    chartWidth,
    chartHeight,
  );

  // status line: relative error readout, retry badges, warnings
  ctx.fillStyle = COLORS.text;
  ctx.font = "12px sans-serif";
  ctx.textAlign = "left";
  const rel = view.relativeError();
  const parts: string[] = [];
  if (rel !== null) parts.push(`relative error ${rel.toFixed(3)}`);
  const retries = [...view.pending.values()].filter((p) => p.retry).length;
  if (retries > 0) parts.push(`${retries} command(s) awaiting retry`);
  if (view.warning) parts.push(view.warning);
  ctx.fillText(parts.join("  —  "), 24, height - 8);

  if (!view.connected) {
    ctx.fillStyle = COLORS.banner;
    ctx.font = "16px sans-serif";
    ctx.textAlign = "center";
    ctx.fillText("disconnected — charts frozen", width / 2, 20);
  }
}

/** Total canvas height needed for the scene plus telemetry rows. */
export function canvasHeight(sceneHeight: number, axisCount: number): number {
  const rows = axisCount + 2; // error axes + speed + currents
  return sceneHeight + rows * (64 + 8) + 24;
}
