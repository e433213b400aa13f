"""Off-policy maximum-entropy learner: twin action-value networks with
target smoothing, a seeded uniform replay buffer, and reparameterized
policy gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nets import (
    Adam,
    GaussianPolicy,
    Mlp,
    grads_as_list,
    log1m_tanh2,
    mlp_params,
    squash,
)


@dataclass
class SacConfig:
    alpha: float = 0.2
    auto_tune_alpha: bool = False
    gamma: float = 0.99
    tau: float = 0.005          # target smoothing coefficient
    replay_capacity: int = 1_000_000
    batch_size: int = 256
    actor_lr: float = 3e-4
    critic_lr: float = 3e-4
    alpha_lr: float = 3e-4
    hidden: tuple = (128, 128)
    activation: str = "relu"
    start_steps: int = 1000     # uniform-random warmup actions
    update_every: int = 1

    def __post_init__(self):
        if self.alpha < 0.0:
            raise ValueError("alpha must be nonnegative")
        if self.replay_capacity < self.batch_size:
            raise ValueError("replay capacity must be >= batch size")
        if not 0.0 < self.tau <= 1.0:
            raise ValueError("tau must be in (0, 1]")


class ReplayError(RuntimeError):
    """Sampling requested before the buffer holds a full batch."""


class ReplayBuffer:
    """Fixed-capacity ring buffer with seeded uniform sampling; insertion
    beyond capacity evicts the oldest transition."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int,
                 seed: int = 0):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.rew = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.done = np.zeros(capacity, dtype=bool)
        self.ptr = 0
        self.size = 0
        self.rng = np.random.default_rng(seed)

    def __len__(self) -> int:
        return self.size

    def add(self, obs, act, rew, next_obs, done) -> None:
        i = self.ptr
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.next_obs[i] = next_obs
        self.done[i] = done
        self.ptr = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int) -> dict:
        if self.size < batch_size:
            raise ReplayError(
                f"replay holds {self.size} < batch size {batch_size}")
        idx = self.rng.integers(0, self.size, size=batch_size)
        return {"obs": self.obs[idx], "act": self.act[idx],
                "rew": self.rew[idx], "next_obs": self.next_obs[idx],
                "done": self.done[idx]}


def soft_update(target: Mlp, online: Mlp, tau: float) -> None:
    for tp, op in zip(mlp_params(target), mlp_params(online)):
        tp *= 1.0 - tau
        tp += tau * op


def _copy_net(net: Mlp) -> Mlp:
    clone = Mlp(net.sizes, activation=net.activation,
                rng=np.random.default_rng(0))
    clone.set_flat(net.get_flat())
    return clone


class SacAgent:
    def __init__(self, obs_dim: int, act_dim: int,
                 config: SacConfig | None = None, seed: int = 0):
        self.cfg = config or SacConfig()
        self.obs_dim, self.act_dim = obs_dim, act_dim
        self.rng = np.random.default_rng(seed)
        cfg = self.cfg
        self.policy = GaussianPolicy(obs_dim, act_dim, hidden=cfg.hidden,
                                     activation=cfg.activation, rng=self.rng,
                                     final_scale=0.01)
        qsizes = [obs_dim + act_dim, *cfg.hidden, 1]
        self.q1 = Mlp(qsizes, activation=cfg.activation, rng=self.rng)
        self.q2 = Mlp(qsizes, activation=cfg.activation, rng=self.rng)
        self.q1_target = _copy_net(self.q1)
        self.q2_target = _copy_net(self.q2)
        self.actor_opt = Adam(mlp_params(self.policy.net), lr=cfg.actor_lr)
        self.q1_opt = Adam(mlp_params(self.q1), lr=cfg.critic_lr)
        self.q2_opt = Adam(mlp_params(self.q2), lr=cfg.critic_lr)
        self.log_alpha = float(np.log(max(cfg.alpha, 1e-8)))
        self.alpha_opt_m = 0.0
        self.alpha_opt_v = 0.0
        self.alpha_opt_t = 0
        self.target_entropy = -float(act_dim)
        self.replay = ReplayBuffer(cfg.replay_capacity, obs_dim, act_dim,
                                   seed=seed + 1)

    @property
    def alpha(self) -> float:
        if self.cfg.auto_tune_alpha:
            return float(np.exp(self.log_alpha))
        return self.cfg.alpha

    def select_action(self, obs, deterministic: bool = False):
        return self.policy.act(obs, rng=self.rng,
                               deterministic=deterministic)[0]

    # -- reparameterized sampling with exact log-probs ------------------

    def _sample_with_logp(self, obs, cache: dict | None = None, xi=None):
        mean, log_std = self.policy.dist(obs, cache)
        std = np.exp(log_std)
        if xi is None:
            xi = self.rng.standard_normal(mean.shape)
        u = mean + std * xi
        a = squash(u)
        logp = (-0.5 * xi * xi - log_std - 0.5 * np.log(2.0 * np.pi)
                - (log1m_tanh2(u) - np.log(2.0))).sum(axis=1)
        return a, logp, u, xi, mean, log_std

    def _min_q(self, obs, act, q1=None, q2=None):
        x = np.concatenate([obs, act], axis=1)
        q1 = q1 or self.q1
        q2 = q2 or self.q2
        return np.minimum(q1.forward(x)[:, 0], q2.forward(x)[:, 0])

    def policy_loss_grads(self, obs, xi=None):
        """Loss mean(alpha * logp - min Q(s, a(theta))) and its exact
        reparameterized gradient through the squashed sample; ``xi`` fixes
        the noise (used by the finite-difference checks)."""
        n = obs.shape[0]
        alpha = self.alpha
        pcache = {}
        a, logp, u, xi, mean, log_std = self._sample_with_logp(obs, pcache,
                                                               xi=xi)
        std = np.exp(log_std)
        xa = np.concatenate([obs, a], axis=1)
        c1, c2 = {}, {}
        q1v = self.q1.forward(xa, c1)[:, 0]
        q2v = self.q2.forward(xa, c2)[:, 0]
        use1 = q1v <= q2v
        # dQ/da via input backprop through whichever critic attains the min
        _, gx1 = self.q1.backward(c1, np.where(use1, 1.0, 0.0)[:, None])
        _, gx2 = self.q2.backward(c2, np.where(use1, 0.0, 1.0)[:, None])
        dq_da = (gx1 + gx2)[:, self.obs_dim:]

        t = np.tanh(u)
        da_du = 0.5 * (1.0 - t * t)
        # d logp / d mean = 2 tanh(u); / d log_std = -1 + 2 tanh(u) std xi
        d_mean = (alpha * 2.0 * t - dq_da * da_du) / n
        d_log_std = (alpha * (-1.0 + 2.0 * t * std * xi)
                     - dq_da * da_du * std * xi) / n
        grads = self.policy.backward_head(pcache, d_mean, d_log_std)
        loss = float(np.mean(alpha * logp - np.minimum(q1v, q2v)))
        return loss, grads, logp

    def update(self, batch: dict | None = None) -> dict:
        """One gradient step on critics, policy, and (optionally) alpha
        from a replay batch; returns loss diagnostics."""
        cfg = self.cfg
        if batch is None:
            batch = self.replay.sample(cfg.batch_size)
        obs = batch["obs"]
        act = batch["act"]
        rew = batch["rew"]
        next_obs = batch["next_obs"]
        done = batch["done"].astype(float)
        n = obs.shape[0]
        alpha = self.alpha

        # critic targets from the frozen target networks
        a2, logp2, *_ = self._sample_with_logp(next_obs)
        x2 = np.concatenate([next_obs, a2], axis=1)
        qt = np.minimum(self.q1_target.forward(x2)[:, 0],
                        self.q2_target.forward(x2)[:, 0])
        y = rew + cfg.gamma * (1.0 - done) * (qt - alpha * logp2)

        x = np.concatenate([obs, act], axis=1)
        q_losses = []
        for qnet, opt in ((self.q1, self.q1_opt), (self.q2, self.q2_opt)):
            c = {}
            q = qnet.forward(x, c)[:, 0]
            err = q - y
            q_losses.append(0.5 * float(np.mean(err**2)))
            grads, _ = qnet.backward(c, (err / n)[:, None])
            opt.step(grads_as_list(grads))

        policy_loss, actor_grads, logp = self.policy_loss_grads(obs)
        self.actor_opt.step(grads_as_list(actor_grads))

        if cfg.auto_tune_alpha:
            # minimize -log_alpha * (logp + target_entropy)
            g = float(np.mean(-(logp + self.target_entropy)))
            self.alpha_opt_t += 1
            self.alpha_opt_m = 0.9 * self.alpha_opt_m + 0.1 * g
            self.alpha_opt_v = 0.999 * self.alpha_opt_v + 0.001 * g * g
            mhat = self.alpha_opt_m / (1 - 0.9**self.alpha_opt_t)
            vhat = self.alpha_opt_v / (1 - 0.999**self.alpha_opt_t)
            self.log_alpha -= cfg.alpha_lr * mhat / (np.sqrt(vhat) + 1e-8)

        soft_update(self.q1_target, self.q1, cfg.tau)
        soft_update(self.q2_target, self.q2, cfg.tau)
        out = {"q1_loss": q_losses[0], "q2_loss": q_losses[1],
               "policy_loss": policy_loss,
               "entropy": float(-np.mean(logp)), "alpha": alpha}
        if any(not np.isfinite(v) for v in out.values()):
            raise FloatingPointError("non-finite SAC diagnostics")
        return out


def sac_update(agent: SacAgent, batch: dict | None = None) -> dict:
    return agent.update(batch)
