import { describe, expect, it } from "vitest";
import { makePanes } from "../src/projection.js";
import { Canvas2D, canvasHeight, renderFrame } from "../src/render.js";
import { ViewModel } from "../src/viewmodel.js";

/** Recording stub implementing the Canvas2D surface. */
function recordingContext(): { ctx: Canvas2D; calls: string[]; texts: string[] } {
  const calls: string[] = [];
  const texts: string[] = [];
  const record =
    (name: string) =>
    (...args: unknown[]) => {
      calls.push(name);
      if (name === "fillText") texts.push(String(args[0]));
    };
  const ctx = {
    fillStyle: "",
    strokeStyle: "",
    lineWidth: 1,
    font: "",
    textAlign: "",
    globalAlpha: 1,
    fillRect: record("fillRect"),
    strokeRect: record("strokeRect"),
    clearRect: record("clearRect"),
    beginPath: record("beginPath"),
    moveTo: record("moveTo"),
    lineTo: record("lineTo"),
    arc: record("arc"),
    stroke: record("stroke"),
    fill: record("fill"),
    fillText: record("fillText"),
    setLineDash: record("setLineDash"),
    save: record("save"),
    restore: record("restore"),
  } as Canvas2D;
  return { ctx, calls, texts };
}

const HELLO = JSON.stringify({
  type: "hello",
  scenario: "2d-paper",
  workspace: { min: [-0.15, -0.15], max: [0.15, 0.15] },
  coils: [
    { position: [-0.075, 0.15], axis: [0.707, -0.707], polarity: 1 },
    { position: [0.075, 0.15], axis: [-0.707, -0.707], polarity: -1 },
  ],
});

const STATE = JSON.stringify({
  type: "state",
  seq: 1,
  t: 0.05,
  pos: [0.01, 0.02],
  vel: [0, 0],
  target: [0, 0.05],
  currents: [1e8, 2e8],
  load_g: 1,
  err: 0.03,
});

describe("renderFrame", () => {
  it("renders a placeholder before hello arrives", () => {
    const { ctx, texts } = recordingContext();
    renderFrame(ctx, 960, 800, 360, new ViewModel(), [], null);
    expect(texts.some((t) => t.includes("waiting"))).toBe(true);
  });

  it("draws the scene, charts, and status once streaming", () => {
    const view = new ViewModel();
    view.dispatch({ kind: "connected", t: 0 });
    view.dispatch({ kind: "server", t: 0, text: HELLO });
    view.dispatch({ kind: "server", t: 0.05, text: STATE });
    const panes = makePanes(view.hello!, 960, 360);
    const { ctx, calls, texts } = recordingContext();
    renderFrame(ctx, 960, canvasHeight(360, 2), 360, view, panes, null);
    expect(calls.filter((c) => c === "arc").length).toBeGreaterThanOrEqual(4);
    expect(texts.some((t) => t.startsWith("error x"))).toBe(true);
    expect(texts.some((t) => t.startsWith("speed"))).toBe(true);
    expect(texts.some((t) => t.includes("currents"))).toBe(true);
    expect(texts.some((t) => t.includes("relative error"))).toBe(true);
    expect(texts.some((t) => t.includes("disconnected"))).toBe(false);
  });

  it("shows the disconnect banner when the socket drops", () => {
    const view = new ViewModel();
    view.dispatch({ kind: "connected", t: 0 });
    view.dispatch({ kind: "server", t: 0, text: HELLO });
    view.dispatch({ kind: "server", t: 0.05, text: STATE });
    view.dispatch({ kind: "disconnected", t: 0.1 });
    const panes = makePanes(view.hello!, 960, 360);
    const { ctx, texts } = recordingContext();
    renderFrame(ctx, 960, canvasHeight(360, 2), 360, view, panes, null);
    expect(texts.some((t) => t.includes("disconnected"))).toBe(true);
  });
});
