import json

import numpy as np
import pytest

from pentabot.checkpoint import (
    CheckpointError,
    checkpoint_from_ppo,
    checkpoint_from_sac,
    from_document,
    load_checkpoint,
    policy_from_checkpoint,
    save_checkpoint,
    to_bytes,
    to_document,
)
from pentabot.ppo import PpoAgent, PpoConfig
from pentabot.sac import SacAgent, SacConfig


@pytest.fixture()
def ppo_ckpt():
    agent = PpoAgent(6, 2, PpoConfig(hidden=(8, 8)), seed=0)
    return agent, checkpoint_from_ppo(agent, "2d-paper", {"note": "t"})


class TestRoundTrip:
    def test_file_round_trip_exact(self, ppo_ckpt, tmp_path):
        agent, ckpt = ppo_ckpt
        path = tmp_path / "ckpt.json"
        save_checkpoint(path, ckpt)
        loaded = load_checkpoint(path)
        np.testing.assert_array_equal(np.asarray(loaded.policy_params),
                                      np.asarray(ckpt.policy_params))
        assert loaded.algorithm == "ppo"
        assert loaded.scenario == "2d-paper"
        assert loaded.metadata == {"note": "t"}

    def test_policy_reconstruction_identical_outputs(self, ppo_ckpt):
        agent, ckpt = ppo_ckpt
        policy = policy_from_checkpoint(ckpt)
        obs = np.random.default_rng(1).normal(size=(4, 6))
        np.testing.assert_array_equal(policy.act(obs, deterministic=True),
                                      agent.policy.act(obs, deterministic=True))

    def test_byte_stability(self, ppo_ckpt):
        agent, _ = ppo_ckpt
        a = to_bytes(checkpoint_from_ppo(agent, "2d-paper"))
        b = to_bytes(checkpoint_from_ppo(agent, "2d-paper"))
        assert a == b

    def test_sac_carries_all_nets(self):
        agent = SacAgent(6, 2, SacConfig(hidden=(8,)), seed=2)
        ckpt = checkpoint_from_sac(agent, "3d-paper")
        assert set(ckpt.extra_nets) == {"q1", "q2", "q1_target", "q2_target"}
        rt = from_document(json.loads(to_bytes(ckpt).decode()))
        np.testing.assert_array_equal(
            np.asarray(rt.extra_nets["q1"]["params"]), agent.q1.get_flat())


class TestValidation:
    def test_wrong_version_rejected(self, ppo_ckpt):
        _, ckpt = ppo_ckpt
        doc = to_document(ckpt)
        doc["format_version"] = 99
        with pytest.raises(CheckpointError):
            from_document(doc)

    def test_param_count_mismatch_rejected(self, ppo_ckpt):
        _, ckpt = ppo_ckpt
        doc = to_document(ckpt)
        doc["policy"]["params"] = doc["policy"]["params"][:-1]
        with pytest.raises(CheckpointError):
            from_document(doc)

    def test_garbage_file_rejected(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("not json {")
        with pytest.raises(CheckpointError):
            load_checkpoint(p)

    def test_non_checkpoint_document(self):
        with pytest.raises(CheckpointError):
            from_document({"hello": 1})
