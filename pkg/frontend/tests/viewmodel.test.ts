import { describe, expect, it } from "vitest";
import { UiEvent, ViewModel } from "../src/viewmodel.js";

const HELLO = JSON.stringify({
  type: "hello",
  scenario: "2d-paper",
  workspace: { min: [-0.15, -0.15], max: [0.15, 0.15] },
  coils: [],
});

function stateFrame(seq: number, t: number, extra: Record<string, unknown> = {}) {
  return JSON.stringify({
    type: "state",
    seq,
    t,
    pos: [0.01 * seq, 0],
    vel: [0.02, 0],
    target: [0.05, 0.05],
    currents: [1, 2],
    load_g: 0,
    err: 0.05,
    ...extra,
  });
}

function boot(): ViewModel {
  const view = new ViewModel();
  view.dispatch({ kind: "connected", t: 0 });
  view.dispatch({ kind: "server", t: 0, text: HELLO });
  return view;
}

describe("ViewModel reducer", () => {
  it("tracks hello and allocates telemetry per axis", () => {
    const view = boot();
    expect(view.hello!.scenario).toBe("2d-paper");
    expect(view.errorAxes.length).toBe(2);
  });

  it("discards stale snapshots by sequence number", () => {
    const view = boot();
    view.dispatch({ kind: "server", t: 0.1, text: stateFrame(2, 0.1) });
    view.dispatch({ kind: "server", t: 0.2, text: stateFrame(1, 0.05) });
    view.dispatch({ kind: "server", t: 0.3, text: stateFrame(2, 0.1) });
    expect(view.lastSeq).toBe(2);
    expect(view.droppedStale).toBe(2);
    expect(view.latest!.pos[0]).toBeCloseTo(0.02, 12);
  });

  it("ignores malformed frames without changing state", () => {
    const view = boot();
    view.dispatch({ kind: "server", t: 0.1, text: stateFrame(1, 0.1) });
    const before = JSON.stringify(view.snapshotState());
    view.dispatch({ kind: "server", t: 0.2, text: "garbage{" });
    expect(JSON.stringify(view.snapshotState())).toBe(before);
  });

  it("moves commands pending -> acked and records the acked target", () => {
    const view = boot();
    const seq = view.allocSeq();
    view.dispatch({
      kind: "command",
      t: 0.1,
      cmd: { type: "set_target", seq, pos: [0.03, 0.04] },
    });
    expect([...view.pending.keys()]).toEqual([seq]);
    view.dispatch({
      kind: "server",
      t: 0.15,
      text: JSON.stringify({ type: "ack", seq, ok: true }),
    });
    expect(view.pending.size).toBe(0);
    expect(view.acksOk).toBe(1);
    expect(view.ackedTarget).toEqual([0.03, 0.04]);
  });

  it("surfaces rejected commands as warnings", () => {
    const view = boot();
    view.dispatch({
      kind: "command",
      t: 0.1,
      cmd: { type: "attach_load", seq: 1, mass_g: -1 },
    });
    view.dispatch({
      kind: "server",
      t: 0.15,
      text: JSON.stringify({ type: "ack", seq: 1, ok: false, reason: "bad mass" }),
    });
    expect(view.acksFailed).toBe(1);
    expect(view.warning).toBe("bad mass");
  });

  it("flags unacked commands for retry after the 2 s timeout", () => {
    const view = boot();
    view.dispatch({
      kind: "command",
      t: 1.0,
      cmd: { type: "pause", seq: 9 },
    });
    view.dispatch({ kind: "tick", t: 2.5 });
    expect(view.pending.get(9)!.retry).toBe(false);
    view.dispatch({ kind: "tick", t: 3.1 });
    expect(view.pending.get(9)!.retry).toBe(true);
  });

  it("annotates load attach and release on the timeline", () => {
    const view = boot();
    view.dispatch({ kind: "server", t: 0.1, text: stateFrame(1, 0.1) });
    view.dispatch({
      kind: "server",
      t: 0.2,
      text: stateFrame(2, 0.2, { load_g: 1 }),
    });
    view.dispatch({
      kind: "server",
      t: 0.3,
      text: stateFrame(3, 0.3, { load_g: 0 }),
    });
    expect(view.markers.map((m) => m.label)).toEqual([
      "load 1.0 g",
      "load released",
    ]);
  });

  it("computes the relative-error readout from the latest snapshot", () => {
    const view = boot();
    view.dispatch({ kind: "server", t: 0.1, text: stateFrame(1, 0.1) });
    expect(view.relativeError()).toBeCloseTo(0.05 / 0.3, 12);
  });

  it("replays a log to identical state sequences", () => {
    const events: UiEvent[] = [
      { kind: "connected", t: 0 },
      { kind: "server", t: 0, text: HELLO },
      { kind: "server", t: 0.05, text: stateFrame(1, 0.05) },
      { kind: "command", t: 0.06, cmd: { type: "set_target", seq: 1, pos: [0, 0] } },
      { kind: "server", t: 0.07, text: JSON.stringify({ type: "ack", seq: 1, ok: true }) },
      { kind: "server", t: 0.1, text: stateFrame(2, 0.1) },
      { kind: "server", t: 0.1, text: stateFrame(2, 0.1) },
      { kind: "disconnected", t: 0.2 },
    ];
    const run = () => {
      const view = new ViewModel();
      return events.map((ev) => {
        view.dispatch(ev);
        return view.snapshotState();
      });
    };
    expect(JSON.stringify(run())).toBe(JSON.stringify(run()));
  });
});
