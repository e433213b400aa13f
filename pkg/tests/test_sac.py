import numpy as np
import pytest

from pentabot.nets import Mlp, mlp_params
from pentabot.sac import (
    ReplayBuffer,
    ReplayError,
    SacAgent,
    SacConfig,
    sac_update,
    soft_update,
)


class TestReplayBuffer:
    def test_eviction_order(self):
        buf = ReplayBuffer(3, 1, 1, seed=0)
        for i in range(5):
            buf.add([i], [i], i, [i], False)
        assert len(buf) == 3
        assert sorted(buf.obs[:, 0].tolist()) == [2.0, 3.0, 4.0]

    def test_seeded_sampling_reproducible(self):
        def fill(seed):
            buf = ReplayBuffer(100, 2, 1, seed=seed)
            rng = np.random.default_rng(1)
            for _ in range(50):
                buf.add(rng.normal(size=2), rng.normal(size=1),
                        rng.normal(), rng.normal(size=2), False)
            return buf.sample(16)

        a, b = fill(7), fill(7)
        for k in a:
            np.testing.assert_array_equal(a[k], b[k])

    def test_insufficient_raises(self):
        buf = ReplayBuffer(10, 1, 1)
        buf.add([0], [0], 0, [0], False)
        with pytest.raises(ReplayError):
            buf.sample(2)

    def test_invalid_capacity(self):
        with pytest.raises(ValueError):
            ReplayBuffer(0, 1, 1)


class TestConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SacConfig(alpha=-0.1)
        with pytest.raises(ValueError):
            SacConfig(replay_capacity=10, batch_size=20)
        with pytest.raises(ValueError):
            SacConfig(tau=0.0)


class TestTargets:
    def test_tau_one_copies_online(self):
        rng = np.random.default_rng(2)
        a = Mlp([3, 4, 1], rng=rng)
        b = Mlp([3, 4, 1], rng=rng)
        soft_update(a, b, 1.0)
        for pa, pb in zip(mlp_params(a), mlp_params(b)):
            np.testing.assert_array_equal(pa, pb)

    def test_targets_track_slowly(self):
        agent = SacAgent(4, 2, SacConfig(batch_size=8, replay_capacity=64,
                                         hidden=(8, 8)), seed=3)
        before = agent.q1_target.get_flat().copy()
        rng = np.random.default_rng(4)
        for _ in range(16):
            agent.replay.add(rng.normal(size=4), rng.uniform(0, 1, 2),
                             rng.normal(), rng.normal(size=4), False)
        sac_update(agent)
        after = agent.q1_target.get_flat()
        online = agent.q1.get_flat()
        drift = np.linalg.norm(after - before)
        gap = np.linalg.norm(online - after)
        assert 0 < drift < gap  # moved toward online, but only slightly


def _rel_err(a, b):
    return np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12)


class TestPolicyLossGradients:
    def test_matches_fd(self):
        agent = SacAgent(5, 2, SacConfig(hidden=(8, 8), batch_size=4,
                                         alpha=0.3), seed=5)
        rng = np.random.default_rng(6)
        obs = rng.normal(size=(12, 5))
        xi = rng.standard_normal((12, 2))
        flat0 = agent.policy.net.get_flat()

        def loss_at(flat):
            agent.policy.net.set_flat(flat)
            return agent.policy_loss_grads(obs, xi=xi)[0]

        agent.policy.net.set_flat(flat0)
        _, grads, _ = agent.policy_loss_grads(obs, xi=xi)
        analytic = Mlp.flatten_grads(grads)
        h = 1e-6
        fd = np.zeros_like(flat0)
        for i in range(flat0.size):
            fp = flat0.copy(); fp[i] += h
            fm = flat0.copy(); fm[i] -= h
            fd[i] = (loss_at(fp) - loss_at(fm)) / (2 * h)
        agent.policy.net.set_flat(flat0)
        assert _rel_err(analytic, fd) < 1e-3

    def test_alpha_zero_drops_entropy_term(self):
        agent = SacAgent(4, 1, SacConfig(hidden=(8,), alpha=0.0), seed=7)
        rng = np.random.default_rng(8)
        obs = rng.normal(size=(6, 4))
        xi = rng.standard_normal((6, 1))
        loss, _, logp = agent.policy_loss_grads(obs, xi=xi)
        minq = agent._min_q(obs, agent._sample_with_logp(obs, xi=xi)[0])
        assert loss == pytest.approx(float(np.mean(-minq)), rel=1e-12)


class TestBandit:
    def test_policy_mean_converges_to_optimum(self):
        # single-state bandit, quadratic reward peaked at a* = 0.7
        a_star = 0.7
        cfg = SacConfig(alpha=0.02, gamma=0.0, tau=0.01, batch_size=64,
                        replay_capacity=10_000, hidden=(32, 32),
                        actor_lr=3e-4, critic_lr=1e-3)
        agent = SacAgent(1, 1, cfg, seed=9)
        obs = np.zeros(1)
        for i in range(5000):
            a = (agent.rng.uniform(0, 1, size=1) if i < 500
                 else agent.select_action(obs))
            r = -((a[0] - a_star) ** 2)
            agent.replay.add(obs, a, r, obs, True)
            if i >= 100:
                diag = sac_update(agent)
                assert np.isfinite(diag["policy_loss"])
        final = agent.select_action(obs, deterministic=True)[0]
        assert abs(final - a_star) < 0.05

    def test_update_without_replay_raises(self):
        agent = SacAgent(2, 1, SacConfig(batch_size=256), seed=10)
        with pytest.raises(ReplayError):
            sac_update(agent)
