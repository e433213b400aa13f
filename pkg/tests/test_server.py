import json

import numpy as np
import pytest

from pentabot.checkpoint import checkpoint_from_ppo
from pentabot.ppo import PpoAgent, PpoConfig
from pentabot.server import Session, create_app

CFG = PpoConfig(hidden=(8, 8), rollout_steps=64)


@pytest.fixture(scope="module")
def ckpt_2d():
    return checkpoint_from_ppo(PpoAgent(24, 2, CFG, seed=0), "2d-paper")


def make_session(ckpt, **kw):
    return Session("2d-paper", ckpt, seed=1, **kw)


class TestSessionCommands:
    def test_hello_document(self, ckpt_2d):
        s = make_session(ckpt_2d)
        h = s.hello()
        assert h["type"] == "hello"
        assert h["scenario"] == "2d-paper"
        assert len(h["workspace"]["min"]) == 2
        assert len(h["coils"]) == 2

    def test_set_target_applied_by_next_tick(self, ckpt_2d):
        s = make_session(ckpt_2d)
        ack = s.apply_command({"type": "set_target", "seq": 1,
                               "pos": [0.01, 0.05]})
        assert ack == {"type": "ack", "seq": 1, "ok": True}
        np.testing.assert_allclose(s.env.target[:2], [0.01, 0.05])
        s.tick()  # target in force during this tick
        np.testing.assert_allclose(s.env.target[:2], [0.01, 0.05])

    def test_set_target_out_of_workspace_clamped(self, ckpt_2d):
        s = make_session(ckpt_2d)
        ack = s.apply_command({"type": "set_target", "seq": 2,
                               "pos": [9.0, -9.0]})
        assert ack["ok"] and ack["reason"] == "clamped"
        np.testing.assert_allclose(s.env.target[:2], [0.15, -0.15])

    def test_attach_detach_lifecycle(self, ckpt_2d):
        s = make_session(ckpt_2d)
        ack = s.apply_command({"type": "attach_load", "seq": 3, "mass_g": 1.0})
        assert ack["ok"]
        assert s.env.state.load_mass == pytest.approx(1e-3)
        again = s.apply_command({"type": "attach_load", "seq": 4, "mass_g": 1.0})
        assert not again["ok"] and "already-loaded" in again["reason"]
        ack = s.apply_command({"type": "detach_load", "seq": 5})
        assert ack["ok"] and s.env.state.load_mass == 0.0
        ack = s.apply_command({"type": "detach_load", "seq": 6})
        assert not ack["ok"] and "not-loaded" in ack["reason"]

    def test_pause_freezes_physics(self, ckpt_2d):
        s = make_session(ckpt_2d)
        s.apply_command({"type": "pause", "seq": 7})
        pos = s.env.state.position.copy()
        s.tick()
        np.testing.assert_array_equal(s.env.state.position, pos)
        s.apply_command({"type": "resume", "seq": 8})
        s.tick()
        assert not np.array_equal(s.env.state.position, pos)

    def test_reset_restores_clock_and_spawn(self, ckpt_2d):
        s = make_session(ckpt_2d)
        for _ in range(5):
            s.tick()
        assert s.sim_time > 0
        s.apply_command({"type": "reset", "seq": 9})
        snap = s.snapshot()
        assert snap["t"] == 0.0
        lo, hi = s.env.episode.spawn_region
        p = np.array(snap["pos"] + [0.0])
        assert np.all(p >= lo) and np.all(p <= hi)

    def test_set_speed_validation(self, ckpt_2d):
        s = make_session(ckpt_2d)
        assert s.apply_command({"type": "set_speed", "seq": 10,
                                "factor": 2.0})["ok"]
        assert s.speed == 2.0
        assert not s.apply_command({"type": "set_speed", "seq": 11,
                                    "factor": 0.0})["ok"]

    def test_malformed_messages_rejected_without_side_effects(self, ckpt_2d):
        s = make_session(ckpt_2d)
        target = s.env.target.copy()
        for bad in ({"type": "warp", "seq": 1},
                    {"type": "set_target", "seq": 2},
                    {"type": "set_target", "seq": 3, "pos": [1.0]},
                    {"seq": 4},
                    {"type": "set_target", "pos": [0, 0]}):
            ack = s.apply_command(bad)
            assert ack["type"] == "ack" and not ack["ok"] and ack["reason"]
        np.testing.assert_array_equal(s.env.target, target)

    def test_snapshot_seq_strictly_increasing(self, ckpt_2d):
        s = make_session(ckpt_2d)
        seqs = [s.snapshot()["seq"] for _ in range(10)]
        assert seqs == sorted(set(seqs))

    def test_snapshot_is_2d_vectors(self, ckpt_2d):
        snap = make_session(ckpt_2d).snapshot()
        assert len(snap["pos"]) == 2 and len(snap["vel"]) == 2
        assert len(snap["currents"]) == 2
        assert snap["load_g"] == 0.0


class TestReplayDeterminism:
    def test_same_command_timeline_identical_trajectory(self, ckpt_2d):
        def run():
            s = make_session(ckpt_2d)
            out = []
            for i in range(60):
                if i == 10:
                    s.apply_command({"type": "set_target", "seq": 1,
                                     "pos": [0.02, 0.06]})
                if i == 30:
                    s.apply_command({"type": "attach_load", "seq": 2,
                                     "mass_g": 0.5})
                s.tick()
                out.append(s.env.state.position.copy())
            return np.array(out)

        np.testing.assert_array_equal(run(), run())

    def test_physics_matches_simulator_module(self, ckpt_2d):
        # the session must advance the same env.step physics: replaying
        # the recorded actions through a bare env reproduces positions
        from pentabot.environment import MaglevEnv, default_episode_config
        from pentabot.scene import preset_scene

        s = make_session(ckpt_2d)
        actions, positions = [], []
        for _ in range(20):
            s.tick()
            actions.append(s.last_action.copy())
            positions.append(s.env.state.position.copy())

        scene = preset_scene("2d-paper")
        env = MaglevEnv(scene, default_episode_config(
            scene, max_steps=10**9, target_resample_interval=10**9))
        env.reset(seed=1)
        for a, p in zip(actions, positions):
            env.step(a)
            np.testing.assert_array_equal(env.state.position, p)


class TestWebSocket:
    def test_dual_client_conformance(self, ckpt_2d):
        from starlette.testclient import TestClient

        session = make_session(ckpt_2d)
        app = create_app(session, realtime=False)
        with TestClient(app) as client:
            with client.websocket_connect("/ws") as ws1, \
                 client.websocket_connect("/ws") as ws2:
                hello1 = json.loads(ws1.receive_text())
                hello2 = json.loads(ws2.receive_text())
                assert hello1 == hello2
                assert hello1["type"] == "hello"

                ws1.send_text(json.dumps({"type": "set_target", "seq": 42,
                                          "pos": [0.0, 0.05]}))

                def drain(ws, n):
                    states, acks = [], []
                    while len(states) < n:
                        doc = json.loads(ws.receive_text())
                        if doc["type"] == "state":
                            states.append(doc)
                        elif doc["type"] == "ack":
                            acks.append(doc)
                    return states, acks

                s1, acks1 = drain(ws1, 8)
                s2, acks2 = drain(ws2, 8)
                assert any(a["seq"] == 42 and a["ok"] for a in acks1)
                assert not acks2  # acks go only to the issuing client
                seqs1 = [d["seq"] for d in s1]
                seqs2 = [d["seq"] for d in s2]
                assert seqs1 == sorted(set(seqs1))
                # identical snapshot streams over the common window
                common = set(seqs1) & set(seqs2)
                assert len(common) >= 4
                by_seq1 = {d["seq"]: d for d in s1}
                by_seq2 = {d["seq"]: d for d in s2}
                for q in common:
                    assert by_seq1[q] == by_seq2[q]
                # the commanded target is reflected in later snapshots
                assert any(d["target"] == [0.0, 0.05] for d in s1)

    def test_incompatible_checkpoint_rejected(self):
        bad = checkpoint_from_ppo(PpoAgent(10, 2, CFG, seed=0), "2d-paper")
        with pytest.raises(ValueError):
            Session("2d-paper", bad)
