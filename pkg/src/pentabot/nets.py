"""Minimal fully-connected networks with hand-written backprop, an Adam
optimizer, and the tanh-squashed Gaussian policy head used by both
learners.  Everything is float64 numpy; gradients are exact and checked
against central finite differences in the test suite."""

from __future__ import annotations

import numpy as np

LOG_STD_MIN = -5.0
LOG_STD_MAX = 2.0
LOG_2PI = float(np.log(2.0 * np.pi))


def _activate(name: str, z: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return np.tanh(z)
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "identity":
        return z
    raise ValueError(f"unknown activation {name!r}")


def _activate_grad(name: str, z: np.ndarray, a: np.ndarray) -> np.ndarray:
    if name == "tanh":
        return 1.0 - a * a
    if name == "relu":
        return (z > 0.0).astype(z.dtype)
    if name == "identity":
        return np.ones_like(z)
    raise ValueError(f"unknown activation {name!r}")


class Mlp:
    """Affine/activation chain; hidden layers share one activation, the
    output layer is linear."""

    def __init__(self, sizes, activation: str = "tanh",
                 rng: np.random.Generator | None = None,
                 final_scale: float = 1.0):
        if len(sizes) < 2:
            raise ValueError("need at least input and output sizes")
        self.sizes = tuple(int(s) for s in sizes)
        if any(s <= 0 for s in self.sizes):
            raise ValueError("layer widths must be positive")
        self.activation = activation
        rng = rng or np.random.default_rng()
        self.weights: list[np.ndarray] = []
        self.biases: list[np.ndarray] = []
        for i, (n_in, n_out) in enumerate(zip(self.sizes, self.sizes[1:])):
            scale = np.sqrt(2.0 / n_in) if activation == "relu" \
                else np.sqrt(1.0 / n_in)
            if i == len(self.sizes) - 2:
                scale *= final_scale
            self.weights.append(rng.normal(0.0, scale, size=(n_in, n_out)))
            self.biases.append(np.zeros(n_out))

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    def forward(self, x: np.ndarray, cache: dict | None = None) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.sizes[0]:
            raise ValueError(f"input dim {x.shape[1]} != {self.sizes[0]}")
        acts = [x]
        zs = []
        h = x
        for i in range(self.n_layers):
            z = h @ self.weights[i] + self.biases[i]
            zs.append(z)
            h = z if i == self.n_layers - 1 else _activate(self.activation, z)
            acts.append(h)
        if cache is not None:
            cache["acts"] = acts
            cache["zs"] = zs
        return h

    def backward(self, cache: dict, grad_out: np.ndarray):
        """Backprop ``grad_out`` (d loss / d output); returns
        ``(grads, grad_input)`` with grads a list of (dW, db)."""
        acts, zs = cache["acts"], cache["zs"]
        grads = [None] * self.n_layers
        g = np.asarray(grad_out, dtype=float)
        for i in range(self.n_layers - 1, -1, -1):
            if i != self.n_layers - 1:
                g = g * _activate_grad(self.activation, zs[i], acts[i + 1])
            dW = acts[i].T @ g
            db = g.sum(axis=0)
            grads[i] = (dW, db)
            g = g @ self.weights[i].T
        return grads, g

    # -- flat parameter views (checkpoints, FD checks) -----------------

    def get_flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in zip(self.weights, self.biases)
                               for a in pair])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        i = 0
        for li in range(self.n_layers):
            for arr in (self.weights[li], self.biases[li]):
                n = arr.size
                arr[...] = flat[i:i + n].reshape(arr.shape)
                i += n
        if i != flat.size:
            raise ValueError("flat parameter vector has wrong length")

    @staticmethod
    def flatten_grads(grads) -> np.ndarray:
        return np.concatenate([a.ravel() for pair in grads for a in pair])


class Adam:
    """Adaptive-moment optimizer over a list of parameter arrays."""

    def __init__(self, params: list[np.ndarray], lr: float = 3e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0

    def step(self, grads: list[np.ndarray]) -> None:
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for p, g, m, v in zip(self.params, grads, self.m, self.v):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            mhat = m / (1 - b1**self.t)
            vhat = v / (1 - b2**self.t)
            p -= self.lr * mhat / (np.sqrt(vhat) + self.eps)


def mlp_params(net: Mlp) -> list[np.ndarray]:
    out = []
    for W, b in zip(net.weights, net.biases):
        out.extend([W, b])
    return out


def grads_as_list(grads) -> list[np.ndarray]:
    out = []
    for dW, db in grads:
        out.extend([dW, db])
    return out


# -- tanh-squashed Gaussian policy -------------------------------------

def softplus(x: np.ndarray) -> np.ndarray:
    return np.logaddexp(0.0, x)


def log1m_tanh2(u: np.ndarray) -> np.ndarray:
    # log(1 - tanh(u)^2), numerically stable for large |u|
    return 2.0 * (np.log(2.0) - u - softplus(-2.0 * u))


def squash(u: np.ndarray) -> np.ndarray:
    """Map pre-squash samples to actions in (0, 1)."""
    return 0.5 * (np.tanh(u) + 1.0)


class GaussianPolicy:
    """MLP trunk ending in (mean, log-std); actions are tanh-squashed and
    affinely mapped to [0, 1] per coordinate."""

    def __init__(self, obs_dim: int, act_dim: int, hidden=(128, 128),
                 activation: str = "tanh",
                 rng: np.random.Generator | None = None,
                 final_scale: float = 0.01, init_log_std: float = 0.0):
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.net = Mlp([obs_dim, *hidden, 2 * act_dim], activation=activation,
                       rng=rng, final_scale=final_scale)
        self.net.biases[-1][act_dim:] = init_log_std

    def dist(self, obs, cache: dict | None = None):
        out = self.net.forward(obs, cache)
        mean = out[:, : self.act_dim]
        raw_log_std = out[:, self.act_dim:]
        log_std = np.clip(raw_log_std, LOG_STD_MIN, LOG_STD_MAX)
        if cache is not None:
            cache["clip_mask"] = ((raw_log_std > LOG_STD_MIN)
                                  & (raw_log_std < LOG_STD_MAX))
        return mean, log_std

    def sample_u(self, obs, rng: np.random.Generator):
        mean, log_std = self.dist(obs)
        noise = rng.standard_normal(mean.shape)
        return mean + np.exp(log_std) * noise, noise

    def act(self, obs, rng: np.random.Generator | None = None,
            deterministic: bool = False):
        obs = np.atleast_2d(np.asarray(obs, dtype=float))
        if deterministic:
            mean, _ = self.dist(obs)
            return squash(mean)
        if rng is None:
            raise ValueError("stochastic action needs an rng")
        u, _ = self.sample_u(obs, rng)
        return squash(u)

    def log_prob_u(self, mean, log_std, u):
        """Log-density of the squashed, [0,1]-mapped action determined by
        the pre-squash sample ``u``."""
        std = np.exp(log_std)
        z = (u - mean) / std
        gauss = -0.5 * z * z - log_std - 0.5 * LOG_2PI
        corr = log1m_tanh2(u) - np.log(2.0)  # tanh then affine *0.5
        return (gauss - corr).sum(axis=1)

    def log_prob_grads(self, mean, log_std, u):
        """d log_prob / d mean and / d log_std with ``u`` held fixed."""
        std = np.exp(log_std)
        z = (u - mean) / std
        return z / std, z * z - 1.0

    def entropy(self, log_std):
        """Pre-squash diagonal-Gaussian entropy (the conventional PPO bonus)."""
        return (log_std + 0.5 * (1.0 + LOG_2PI)).sum(axis=1)

    def backward_head(self, cache, d_mean, d_log_std):
        """Backprop head gradients through the trunk; the log-std clamp
        zeroes gradients outside its active range."""
        d_log_std = d_log_std * cache["clip_mask"]
        grad_out = np.concatenate([d_mean, d_log_std], axis=1)
        grads, _ = self.net.backward(cache, grad_out)
        return grads
