"""Record wire-protocol fixtures for the operator-UI tests.

Drives the pure Session (no network, no wall clock) through scripted
command timelines and writes the resulting event logs — exactly what a
browser client would have received — as JSON fixtures.

Usage: python3 tools/record_session.py CHECKPOINT OUT_DIR
"""
import json
import sys

sys.path.insert(0, "/root/pkg/src")

from pentabot.server import Session

SNAPSHOT_TICKS = 5  # 20 Hz at the 10 ms control period

# Canvas geometry mirrored from the UI (makePanes with a 960x360 scene
# area and 24 px margins); the recorded set_target position must equal
# what the UI's click inversion produces for the same pixel.
PANE = {"left": 24.0, "top": 24.0, "width": 912.0, "height": 312.0}


def world_to_pixel(pane, ws, x, y):
    fh = (x - ws["min"][0]) / (ws["max"][0] - ws["min"][0])
    fv = (y - ws["min"][1]) / (ws["max"][1] - ws["min"][1])
    return (pane["left"] + fh * pane["width"],
            pane["top"] + (1.0 - fv) * pane["height"])


def pixel_to_world(pane, ws, px, py):
    fh = (px - pane["left"]) / pane["width"]
    fv = 1.0 - (py - pane["top"]) / pane["height"]
    return (ws["min"][0] + fh * (ws["max"][0] - ws["min"][0]),
            ws["min"][1] + fv * (ws["max"][1] - ws["min"][1]))


class Recorder:
    def __init__(self, session):
        self.session = session
        self.events = []
        self.next_seq = 1

    @property
    def t(self):
        return self.session.sim_time

    def server(self, doc):
        self.events.append({"kind": "server", "t": self.t,
                            "text": json.dumps(doc)})
        return doc

    def command(self, cmd):
        cmd = {"seq": self.next_seq, **cmd}
        self.next_seq += 1
        self.events.append({"kind": "command", "t": self.t, "cmd": cmd})
        ack = self.session.apply_command(cmd)
        self.server(ack)
        return cmd, ack

    def run(self, seconds):
        """Advance simulation time, recording 20 Hz snapshots."""
        ticks = int(round(seconds / 0.01))
        snaps = []
        for i in range(ticks):
            self.session.tick()
            if (i + 1) % SNAPSHOT_TICKS == 0:
                snaps.append(self.server(self.session.snapshot()))
        return snaps


def record_replay_fixture(checkpoint, path):
    """Conformance log: hello, streaming, commands, a duplicated frame,
    a rejected command, and a disconnect."""
    session = Session("2d-paper", checkpoint, seed=11)
    rec = Recorder(session)
    rec.events.append({"kind": "connected", "t": 0.0})
    rec.server(session.hello())
    rec.run(1.0)
    rec.command({"type": "set_target", "pos": [0.02, 0.05]})
    rec.run(1.0)
    # duplicate the last state frame: the reducer must drop it as stale
    dup = rec.events[-1]
    assert dup["kind"] == "server" and '"state"' in dup["text"]
    rec.events.append(dict(dup))
    # a command the server rejects
    rec.command({"type": "attach_load", "mass_g": -5.0})
    rec.command({"type": "pause"})
    rec.command({"type": "resume"})
    rec.run(0.5)
    rec.events.append({"kind": "disconnected", "t": rec.t})
    with open(path, "w") as f:
        json.dump({"scenario": "2d-paper", "events": rec.events}, f, indent=1)
    print(f"wrote {path} ({len(rec.events)} events)")


def record_operator_fixture(checkpoint, path, sigma_p=0.05):
    """Operator loop: settle, click a target, watch the error fall below
    sigma_p, attach and detach the load, every command acked."""
    session = Session("2d-paper", checkpoint, seed=7)
    rec = Recorder(session)
    rec.events.append({"kind": "connected", "t": 0.0})
    hello = rec.server(session.hello())
    ws = hello["workspace"]
    rec.run(3.0)  # settle toward the spawn target
    start = [float(x) for x in session.env.state.position[:2]]

    # operator clicks a point a few centimetres from the current hold
    click_world = (start[0] + (0.03 if start[0] < 0.04 else -0.03),
                   min(max(start[1], 0.02), 0.08))
    px, py = world_to_pixel(PANE, ws, *click_world)
    target = pixel_to_world(PANE, ws, px, py)
    cmd, ack = rec.command({"type": "set_target", "pos": list(target)})
    assert ack["ok"], ack
    rec.run(5.0)

    # the load outweighs the actuator; keep the carry interval short so
    # the session stays inside the workspace while loaded
    _, ack = rec.command({"type": "attach_load", "mass_g": 1.0})
    assert ack["ok"], ack
    rec.run(0.4)
    _, ack = rec.command({"type": "detach_load"})
    assert ack["ok"], ack
    rec.run(0.5)

    fixture = {
        "scenario": "2d-paper",
        "sigma_p": sigma_p,
        "pane": PANE,
        "click_pixel": [px, py],
        "click_target": list(target),
        "events": rec.events,
    }
    with open(path, "w") as f:
        json.dump(fixture, f, indent=1)
    click_t = next(e["t"] for e in rec.events
                   if e["kind"] == "command" and e["cmd"] == cmd)
    errs = [json.loads(e["text"]).get("err") for e in rec.events
            if e["kind"] == "server" and '"state"' in e["text"]
            and click_t < e["t"] <= click_t + 5.0]
    print(f"wrote {path} ({len(rec.events)} events); "
          f"min err after click = {min(errs):.4f} (sigma_p {sigma_p})")


def main():
    checkpoint, out_dir = sys.argv[1], sys.argv[2]
    record_replay_fixture(checkpoint, f"{out_dir}/session_log.json")
    record_operator_fixture(checkpoint, f"{out_dir}/operator_loop.json")


if __name__ == "__main__":
    main()
