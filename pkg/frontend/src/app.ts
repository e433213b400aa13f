/**
 * Browser entry point: wires the WebSocket, user gestures, and the
 * render loop together.  All state changes flow through the ViewModel
 * reducer; this module only performs I/O.
 */

import { ClientCommand, serializeCommand } from "./protocol.js";
import { clickToTarget, makePanes, Pane, paneAt } from "./projection.js";
import { Canvas2D, canvasHeight, renderFrame } from "./render.js";
import { ViewModel } from "./viewmodel.js";

const SCENE_HEIGHT = 360;
const SNAPSHOT_PERIOD_S = 0.05;

export class OperatorApp {
  view = new ViewModel();
  panes: Pane[] = [];
  private socket: WebSocket | null = null;
  private prevPos: number[] | null = null;
  private prevWall = 0;

  constructor(
    private canvas: HTMLCanvasElement,
    private serverUrl: string,
    private now: () => number = () => performance.now() / 1000,
  ) {}

  start(): void {
    this.connect();
    this.canvas.addEventListener("click", (ev) => {
      const rect = this.canvas.getBoundingClientRect();
      this.handleClick(ev.clientX - rect.left, ev.clientY - rect.top);
    });
    const frame = () => {
      this.renderOnce();
      requestAnimationFrame(frame);
    };
    requestAnimationFrame(frame);
  }

  private connect(): void {
    const socket = new WebSocket(this.serverUrl);
    this.socket = socket;
    socket.onopen = () => this.view.dispatch({ kind: "connected", t: this.now() });
    socket.onmessage = (ev) => {
      const before = this.view.latest;
      this.view.dispatch({ kind: "server", t: this.now(), text: String(ev.data) });
      if (this.view.latest !== before && before) {
        this.prevPos = before.pos;
        this.prevWall = this.now();
      }
      if (this.view.hello && this.panes.length === 0) {
        this.layOut();
      }
    };
    const drop = () => {
      this.view.dispatch({ kind: "disconnected", t: this.now() });
      this.socket = null;
      setTimeout(() => this.connect(), 1000);
    };
    socket.onclose = drop;
    socket.onerror = () => socket.close();
  }

  private layOut(): void {
    const hello = this.view.hello;
    if (!hello) return;
    this.canvas.height = canvasHeight(SCENE_HEIGHT, hello.workspace.min.length);
    this.panes = makePanes(hello, this.canvas.width, SCENE_HEIGHT);
  }

  send(cmd: ClientCommand): void {
    if (!this.socket || this.socket.readyState !== WebSocket.OPEN) {
      this.view.dispatch({ kind: "warning", t: this.now(), text: "not connected" });
      return;
    }
    this.view.dispatch({ kind: "command", t: this.now(), cmd });
    this.socket.send(serializeCommand(cmd));
  }

  handleClick(px: number, py: number): void {
    const state = this.view.latest;
    if (!state) return;
    const pane = paneAt(this.panes, px, py);
    const cmd = pane
      ? clickToTarget(pane, px, py, state.target, this.view.allocSeq())
      : null;
    if (cmd === null) {
      this.view.dispatch({
        kind: "warning",
        t: this.now(),
        text: "click outside workspace",
      });
      return;
    }
    this.send(cmd);
  }

  attachLoad(massG: number): void {
    this.send({ type: "attach_load", seq: this.view.allocSeq(), mass_g: massG });
  }

  simple(type: "detach_load" | "pause" | "resume" | "reset"): void {
    this.send({ type, seq: this.view.allocSeq() });
  }

  setSpeed(factor: number): void {
    this.send({ type: "set_speed", seq: this.view.allocSeq(), factor });
  }

  /** Actuator position interpolated between the last two snapshots. */
  interpolatedPosition(): number[] | null {
    const state = this.view.latest;
    if (!state) return null;
    if (!this.prevPos) return state.pos;
    const alpha = Math.min(1, (this.now() - this.prevWall) / SNAPSHOT_PERIOD_S);
    return state.pos.map((p, i) => this.prevPos![i] + alpha * (p - this.prevPos![i]));
  }

  renderOnce(): void {
    const ctx = this.canvas.getContext("2d") as unknown as Canvas2D;
    this.view.dispatch({ kind: "tick", t: this.now() });
    renderFrame(
      ctx,
      this.canvas.width,
      this.canvas.height,
      SCENE_HEIGHT,
      this.view,
      this.panes,
      this.interpolatedPosition(),
    );
  }
}

export function main(): void {
  const canvas = document.getElementById("scene") as HTMLCanvasElement;
  const params = new URLSearchParams(window.location.search);
  const url = params.get("server") ?? `ws://${window.location.host}/ws`;
  const app = new OperatorApp(canvas, url);
  const bind = (id: string, fn: () => void) => {
    const el = document.getElementById(id);
    if (el) el.addEventListener("click", fn);
  };
  bind("attach", () => app.attachLoad(1.0));
  bind("detach", () => app.simple("detach_load"));
  bind("pause", () => app.simple("pause"));
  bind("resume", () => app.simple("resume"));
  bind("reset", () => app.simple("reset"));
  const speed = document.getElementById("speed") as HTMLInputElement | null;
  if (speed) {
    speed.addEventListener("change", () => app.setSpeed(Number(speed.value)));
  }
  app.start();
}

if (typeof window !== "undefined" && typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", main);
  } else {
    main();
  }
}
