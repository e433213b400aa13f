"""Clipped-surrogate on-policy learner: GAE advantages, the clipped
probability-ratio objective, and the rollout/update loop."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nets import Adam, GaussianPolicy, Mlp, grads_as_list, mlp_params


@dataclass
class PpoConfig:
    clip_epsilon: float = 0.2
    gamma: float = 0.99
    gae_lambda: float = 0.95
    epochs: int = 10
    minibatch_size: int = 256
    rollout_steps: int = 2048
    actor_lr: float = 3e-4
    critic_lr: float = 1e-3
    entropy_coef: float = 1e-3
    hidden: tuple = (128, 128)
    activation: str = "tanh"
    init_log_std: float = 0.0
    lr_decay: bool = False      # linear decay of both rates to 0

    def __post_init__(self):
        if not 0.0 < self.clip_epsilon < 1.0:
            raise ValueError("clip_epsilon must be in (0, 1)")
        if not 0.0 < self.gamma <= 1.0:
            raise ValueError("gamma must be in (0, 1]")
        if not 0.0 <= self.gae_lambda <= 1.0:
            raise ValueError("gae_lambda must be in [0, 1]")


def gae_advantages(rewards, values, terminals, gamma, lam, truncations=None):
    """Generalized advantage estimation.

    ``values`` has length T+1 (bootstrap value last); ``terminals`` marks
    true environment terminations (no bootstrap), ``truncations`` marks
    time-limit cuts (bootstrap through the value, reset the recursion).
    Returns (advantages, returns) with returns = advantages + values[:T].
    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    terminals = np.asarray(terminals, dtype=bool)
    T = len(rewards)
    if len(values) != T + 1 or len(terminals) != T:
        raise ValueError("misaligned GAE inputs")
    if truncations is None:
        truncations = np.zeros(T, dtype=bool)
    else:
        truncations = np.asarray(truncations, dtype=bool)
        if len(truncations) != T:
            raise ValueError("misaligned GAE inputs")
    adv = np.zeros(T)
    last = 0.0
    for t in range(T - 1, -1, -1):
        nonterm = 0.0 if terminals[t] else 1.0
        delta = rewards[t] + gamma * nonterm * values[t + 1] - values[t]
        cut = terminals[t] or truncations[t]
        last = delta + gamma * lam * (0.0 if cut else 1.0) * last
        adv[t] = last
    return adv, adv + values[:T]


def ppo_loss(policy: GaussianPolicy, value_net: Mlp, obs, u, old_log_probs,
             advantages, returns, clip_epsilon: float,
             entropy_coef: float = 0.0):
    """Losses and exact gradients for one minibatch.

    Returns a dict with the scalar policy loss (negated clipped surrogate
    minus the entropy bonus), the value loss, diagnostics, and per-network
    gradients.
    """
    obs = np.asarray(obs, dtype=float)
    u = np.asarray(u, dtype=float)
    old_log_probs = np.asarray(old_log_probs, dtype=float)
    advantages = np.asarray(advantages, dtype=float)
    if not (np.all(np.isfinite(obs)) and np.all(np.isfinite(advantages))):
        raise ValueError("non-finite inputs to ppo_loss")
    n = obs.shape[0]

    cache = {}
    mean, log_std = policy.dist(obs, cache)
    logp = policy.log_prob_u(mean, log_std, u)
    ratio = np.exp(logp - old_log_probs)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    surr_unclipped = ratio * advantages
    surr_clipped = clipped * advantages
    surrogate = np.minimum(surr_unclipped, surr_clipped)
    entropy = policy.entropy(log_std)
    policy_loss = -surrogate.mean() - entropy_coef * entropy.mean()

    # gradient flows through the ratio only where the unclipped branch wins
    active = surr_unclipped <= surr_clipped
    d_logp = np.where(active, -ratio * advantages / n, 0.0)
    dmean_term, dlogstd_term = policy.log_prob_grads(mean, log_std, u)
    d_mean = d_logp[:, None] * dmean_term
    d_log_std = d_logp[:, None] * dlogstd_term
    d_log_std -= entropy_coef / n  # entropy bonus: d entropy / d log_std = 1
    actor_grads = policy.backward_head(cache, d_mean, d_log_std)

    vcache = {}
    v = value_net.forward(obs, vcache)[:, 0]
    verr = v - np.asarray(returns, dtype=float)
    value_loss = 0.5 * float(np.mean(verr**2))
    critic_grads, _ = value_net.backward(vcache, (verr / n)[:, None])

    return {
        "policy_loss": float(policy_loss),
        "value_loss": value_loss,
        "entropy": float(entropy.mean()),
        "surrogate": float(surrogate.mean()),
        "clip_fraction": float(np.mean(ratio != clipped)),
        "actor_grads": actor_grads,
        "critic_grads": critic_grads,
    }


class PpoAgent:
    def __init__(self, obs_dim: int, act_dim: int,
                 config: PpoConfig | None = None, seed: int = 0):
        self.cfg = config or PpoConfig()
        self.rng = np.random.default_rng(seed)
        self.policy = GaussianPolicy(obs_dim, act_dim, hidden=self.cfg.hidden,
                                     activation=self.cfg.activation,
                                     rng=self.rng, final_scale=0.01,
                                     init_log_std=self.cfg.init_log_std)
        self.value_net = Mlp([obs_dim, *self.cfg.hidden, 1],
                             activation=self.cfg.activation, rng=self.rng)
        self.actor_opt = Adam(mlp_params(self.policy.net), lr=self.cfg.actor_lr)
        self.critic_opt = Adam(mlp_params(self.value_net), lr=self.cfg.critic_lr)

    def set_progress(self, fraction: float) -> None:
        """Linear learning-rate decay hook (fraction of run completed)."""
        if self.cfg.lr_decay:
            scale = max(0.0, 1.0 - fraction)
            self.actor_opt.lr = self.cfg.actor_lr * scale
            self.critic_opt.lr = self.cfg.critic_lr * scale

    def select_action(self, obs, deterministic: bool = False):
        a = self.policy.act(obs, rng=self.rng, deterministic=deterministic)
        return a[0]

    def collect_rollout(self, env, n_steps: int, obs):
        """Step the environment for ``n_steps``, resetting on episode end;
        returns the batch plus the observation to continue from."""
        cfg = self.cfg
        O = np.empty((n_steps, self.policy.obs_dim))
        U = np.empty((n_steps, self.policy.act_dim))
        R = np.empty(n_steps)
        V = np.empty(n_steps + 1)
        LP = np.empty(n_steps)
        term = np.zeros(n_steps, dtype=bool)
        trunc = np.zeros(n_steps, dtype=bool)
        ep_rewards = []
        ep_reward = 0.0
        for t in range(n_steps):
            O[t] = obs
            mean, log_std = self.policy.dist(obs[None, :])
            noise = self.rng.standard_normal(mean.shape)
            u = mean + np.exp(log_std) * noise
            action = 0.5 * (np.tanh(u) + 1.0)
            LP[t] = self.policy.log_prob_u(mean, log_std, u)[0]
            U[t] = u[0]
            V[t] = self.value_net.forward(obs[None, :])[0, 0]
            obs, r, terminated, truncated, _ = env.step(action[0])
            R[t] = r
            ep_reward += r
            term[t] = terminated
            trunc[t] = truncated
            if terminated or truncated:
                ep_rewards.append(ep_reward)
                ep_reward = 0.0
                obs = env.reset()
        V[n_steps] = self.value_net.forward(obs[None, :])[0, 0]
        adv, ret = gae_advantages(R, V, term, cfg.gamma, cfg.gae_lambda,
                                  truncations=trunc)
        batch = {"obs": O, "u": U, "log_probs": LP, "advantages": adv,
                 "returns": ret, "rewards": R, "ep_rewards": ep_rewards}
        return batch, obs

    def update(self, batch) -> dict:
        cfg = self.cfg
        adv = batch["advantages"]
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        n = len(adv)
        diag = {}
        for _ in range(cfg.epochs):
            order = self.rng.permutation(n)
            for start in range(0, n, cfg.minibatch_size):
                idx = order[start:start + cfg.minibatch_size]
                out = ppo_loss(self.policy, self.value_net,
                               batch["obs"][idx], batch["u"][idx],
                               batch["log_probs"][idx], adv[idx],
                               batch["returns"][idx],
                               cfg.clip_epsilon, cfg.entropy_coef)
                self.actor_opt.step(grads_as_list(out["actor_grads"]))
                self.critic_opt.step(grads_as_list(out["critic_grads"]))
                diag = out
        return {k: diag[k] for k in
                ("policy_loss", "value_loss", "entropy", "clip_fraction")}
