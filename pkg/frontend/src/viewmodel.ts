/**
 * UI state reducer.  The ViewModel is a pure function of the event
 * history: every network frame, user command, and clock tick arrives as
 * a timestamped event, so replaying a recorded log reproduces identical
 * states byte for byte.
 */

import {
  AckMessage,
  ClientCommand,
  HelloMessage,
  StateMessage,
  parseServerMessage,
} from "./protocol.js";
import { RingBuffer } from "./telemetry.js";

export const ACK_TIMEOUT_S = 2.0;
export const TELEMETRY_WINDOW_S = 30.0;
const TELEMETRY_CAPACITY = 1024;

export type UiEvent =
  | { kind: "connected"; t: number }
  | { kind: "disconnected"; t: number }
  | { kind: "server"; t: number; text: string }
  | { kind: "command"; t: number; cmd: ClientCommand }
  | { kind: "warning"; t: number; text: string }
  | { kind: "tick"; t: number };

export interface PendingCommand {
  cmd: ClientCommand;
  sentAt: number;
  /** set once the command has gone unacked past ACK_TIMEOUT_S */
  retry: boolean;
}

export interface TimelineMarker {
  t: number; // simulation time of the surrounding snapshot
  label: string;
}

export class ViewModel {
  connected = false;
  hello: HelloMessage | null = null;
  latest: StateMessage | null = null;
  lastSeq = 0;
  nextCommandSeq = 1;
  pending = new Map<number, PendingCommand>();
  /** last set_target position the server acknowledged */
  ackedTarget: number[] | null = null;
  warning: string | null = null;
  markers: TimelineMarker[] = [];
  errorAxes: RingBuffer[] = [];
  speed = new RingBuffer(TELEMETRY_CAPACITY, TELEMETRY_WINDOW_S);
  droppedStale = 0;
  acksOk = 0;
  acksFailed = 0;

  get dims(): number {
    return this.hello ? this.hello.workspace.min.length : 0;
  }

  /** Allocate the next command sequence number (monotonic per session). */
  allocSeq(): number {
    return this.nextCommandSeq++;
  }

  dispatch(ev: UiEvent): void {
    switch (ev.kind) {
      case "connected":
        this.connected = true;
        this.warning = null;
        break;
      case "disconnected":
        this.connected = false;
        break;
      case "server": {
        const msg = parseServerMessage(ev.text);
        if (msg === null) break; // malformed frames are ignored
        if (msg.type === "hello") this.onHello(msg);
        else if (msg.type === "state") this.onState(msg);
        else this.onAck(msg);
        break;
      }
      case "command":
        this.pending.set(ev.cmd.seq, { cmd: ev.cmd, sentAt: ev.t, retry: false });
        this.warning = null;
        break;
      case "warning":
        this.warning = ev.text;
        break;
      case "tick":
        break;
    }
    this.expirePending(ev.t);
  }

  private onHello(msg: HelloMessage): void {
    this.hello = msg;
    const d = msg.workspace.min.length;
    this.errorAxes = [];
    for (let i = 0; i < d; i++) {
      this.errorAxes.push(new RingBuffer(TELEMETRY_CAPACITY, TELEMETRY_WINDOW_S));
    }
  }

  private onState(msg: StateMessage): void {
    if (msg.seq <= this.lastSeq) {
      this.droppedStale++;
      return;
    }
    const prevLoad = this.latest ? this.latest.load_g : 0;
    this.lastSeq = msg.seq;
    this.latest = msg;
    for (let i = 0; i < this.errorAxes.length && i < msg.pos.length; i++) {
      this.errorAxes[i].push(msg.t, msg.pos[i] - msg.target[i]);
    }
    let v2 = 0;
    for (const v of msg.vel) v2 += v * v;
    this.speed.push(msg.t, Math.sqrt(v2) * 1000.0); // mm/s
    if (msg.load_g > 0 && prevLoad === 0) {
      this.markers.push({ t: msg.t, label: `load ${msg.load_g.toFixed(1)} g` });
    } else if (msg.load_g === 0 && prevLoad > 0) {
      this.markers.push({ t: msg.t, label: "load released" });
    }
  }

  private onAck(msg: AckMessage): void {
    const entry = this.pending.get(msg.seq);
    this.pending.delete(msg.seq);
    if (!msg.ok) {
      this.acksFailed++;
      this.warning = msg.reason ?? "command rejected";
      return;
    }
    this.acksOk++;
    if (entry && entry.cmd.type === "set_target") {
      this.ackedTarget = entry.cmd.pos.slice();
    }
  }

  private expirePending(now: number): void {
    for (const entry of this.pending.values()) {
      if (!entry.retry && now - entry.sentAt > ACK_TIMEOUT_S) {
        entry.retry = true;
      }
    }
  }

  /** Relative error: tracked error over the controllable range. */
  relativeError(controllableRange = 0.3): number | null {
    if (!this.latest) return null;
    return this.latest.err / controllableRange;
  }

  /** Plain-data projection of the state, used by the replay tests. */
  snapshotState(): Record<string, unknown> {
    return {
      connected: this.connected,
      scenario: this.hello ? this.hello.scenario : null,
      lastSeq: this.lastSeq,
      pos: this.latest ? this.latest.pos : null,
      target: this.latest ? this.latest.target : null,
      err: this.latest ? this.latest.err : null,
      load_g: this.latest ? this.latest.load_g : null,
      ackedTarget: this.ackedTarget,
      pendingSeqs: [...this.pending.keys()].sort((a, b) => a - b),
      retrySeqs: [...this.pending.entries()]
        .filter(([, e]) => e.retry)
        .map(([s]) => s)
        .sort((a, b) => a - b),
      droppedStale: this.droppedStale,
      acksOk: this.acksOk,
      acksFailed: this.acksFailed,
      warning: this.warning,
      markers: this.markers.map((m) => m.label),
    };
  }
}
