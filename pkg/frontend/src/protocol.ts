/**
 * Wire protocol spoken with the control server: one JSON document per
 * WebSocket text frame. Parsing is strict — unknown or malformed
 * documents are rejected so the reducer never sees garbage.
 */

export interface HelloMessage {
  type: "hello";
  scenario: string;
  workspace: { min: number[]; max: number[] };
  coils: { position: number[]; axis: number[]; polarity: number }[];
}

export interface StateMessage {
  type: "state";
  seq: number;
  t: number;
  pos: number[];
  vel: number[];
  target: number[];
  currents: number[];
  load_g: number;
  err: number;
}

export interface AckMessage {
  type: "ack";
  seq: number;
  ok: boolean;
  reason?: string;
}

export type ServerMessage = HelloMessage | StateMessage | AckMessage;

export interface SetTargetCommand {
  type: "set_target";
  seq: number;
  pos: number[];
}

export interface AttachLoadCommand {
  type: "attach_load";
  seq: number;
  mass_g: number;
}

export interface SimpleCommand {
  type: "detach_load" | "pause" | "resume" | "reset";
  seq: number;
}

export interface SetSpeedCommand {
  type: "set_speed";
  seq: number;
  factor: number;
}

export type ClientCommand =
  | SetTargetCommand
  | AttachLoadCommand
  | SimpleCommand
  | SetSpeedCommand;

function isNumberArray(x: unknown): x is number[] {
  return Array.isArray(x) && x.every((v) => typeof v === "number" && isFinite(v));
}

/** Parse a server frame; returns null for anything malformed. */
export function parseServerMessage(text: string): ServerMessage | null {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    return null;
  }
  if (typeof doc !== "object" || doc === null) return null;
  const m = doc as Record<string, unknown>;
  switch (m.type) {
    case "hello": {
      const ws = m.workspace as Record<string, unknown> | undefined;
      if (
        typeof m.scenario !== "string" ||
        !ws ||
        !isNumberArray(ws.min) ||
        !isNumberArray(ws.max) ||
        !Array.isArray(m.coils)
      )
        return null;
      return m as unknown as HelloMessage;
    }
    case "state": {
      if (
        typeof m.seq !== "number" ||
        typeof m.t !== "number" ||
        !isNumberArray(m.pos) ||
        !isNumberArray(m.vel) ||
        !isNumberArray(m.target) ||
        !isNumberArray(m.currents) ||
        typeof m.load_g !== "number" ||
        typeof m.err !== "number"
      )
        return null;
      return m as unknown as StateMessage;
    }
    case "ack": {
      if (typeof m.seq !== "number" || typeof m.ok !== "boolean") return null;
      return m as unknown as AckMessage;
    }
    default:
      return null;
  }
}

export function serializeCommand(cmd: ClientCommand): string {
  return JSON.stringify(cmd);
}
