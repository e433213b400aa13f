/**
 * Scripted operator loop against a recorded closed-loop session: the
 * operator clicks a target, the tracked error falls below sigma_p
 * within 5 simulated seconds, the load is attached and detached, and
 * every command is acknowledged.
 *
 * The fixture was captured from the real control session; this test
 * independently re-derives the click command from the recorded pixel
 * through the UI's own projection math and checks it matches what the
 * session received.
 */
import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";
import { clickToTarget, makePanes, paneAt } from "../src/projection.js";
import { HelloMessage, StateMessage, SetTargetCommand } from "../src/protocol.js";
import { UiEvent, ViewModel } from "../src/viewmodel.js";

interface OperatorFixture {
  scenario: string;
  sigma_p: number;
  pane: { left: number; top: number; width: number; height: number };
  click_pixel: [number, number];
  click_target: number[];
  events: UiEvent[];
}

const fixture = JSON.parse(
  readFileSync(new URL("./fixtures/operator_loop.json", import.meta.url), "utf8"),
) as OperatorFixture;

function findCommand(type: string): Extract<UiEvent, { kind: "command" }> {
  const ev = fixture.events.find(
    (e) => e.kind === "command" && e.cmd.type === type,
  );
  expect(ev, `fixture should contain a ${type} command`).toBeDefined();
  return ev as Extract<UiEvent, { kind: "command" }>;
}

describe("operator loop", () => {
  it("the recorded click maps through the UI projection to the sent command", () => {
    const helloEvent = fixture.events.find(
      (e) => e.kind === "server" && e.text.includes('"hello"'),
    ) as Extract<UiEvent, { kind: "server" }>;
    const hello = JSON.parse(helloEvent.text) as HelloMessage;
    const panes = makePanes(hello, 960, 360);
    const [px, py] = fixture.click_pixel;
    const pane = paneAt(panes, px, py);
    expect(pane).not.toBeNull();

    const sent = findCommand("set_target").cmd as SetTargetCommand;
    const derived = clickToTarget(pane!, px, py, sent.pos, sent.seq);
    expect(derived).not.toBeNull();
    for (let i = 0; i < sent.pos.length; i++) {
      expect(Math.abs(derived!.pos[i] - sent.pos[i])).toBeLessThan(1e-9);
    }
  });

  it("tracked error falls below sigma_p within 5 simulated seconds of the click", () => {
    const click = findCommand("set_target");
    let minErr = Infinity;
    for (const ev of fixture.events) {
      if (ev.kind !== "server" || !ev.text.includes('"state"')) continue;
      if (ev.t <= click.t || ev.t > click.t + 5.0) continue;
      const state = JSON.parse(ev.text) as StateMessage;
      minErr = Math.min(minErr, state.err);
    }
    expect(minErr).toBeLessThan(fixture.sigma_p);
  });

  it("attaches and detaches the load with timeline markers", () => {
    findCommand("attach_load");
    findCommand("detach_load");
    const view = new ViewModel();
    for (const ev of fixture.events) view.dispatch(ev);
    const labels = view.markers.map((m) => m.label);
    expect(labels.some((l) => l.startsWith("load 1.0"))).toBe(true);
    expect(labels).toContain("load released");
    expect(view.latest!.load_g).toBe(0);
  });

  it("every command is acknowledged", () => {
    const view = new ViewModel();
    for (const ev of fixture.events) view.dispatch(ev);
    const commands = fixture.events.filter((e) => e.kind === "command").length;
    expect(commands).toBeGreaterThanOrEqual(3);
    expect(view.acksOk).toBe(commands);
    expect(view.acksFailed).toBe(0);
    expect(view.pending.size).toBe(0);
  });
});
