"""Self-describing policy checkpoints.

A checkpoint is a single JSON document carrying the format version,
algorithm and scenario names, network shapes/activations, and all
parameters as decimal text.  Serialization is byte-stable: identical
parameters always produce identical bytes, and parameters survive a
round-trip exactly (``repr`` of a float parses back to the same float).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .nets import GaussianPolicy, Mlp

FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Malformed or incompatible checkpoint document."""


@dataclass
class PolicyCheckpoint:
    algorithm: str              # "ppo" | "sac"
    scenario: str
    obs_dim: int
    act_dim: int
    policy_sizes: tuple
    policy_activation: str
    policy_params: list         # flat float list
    extra_nets: dict = field(default_factory=dict)
    # each extra net: {"sizes": [...], "activation": str, "params": [...]}
    metadata: dict = field(default_factory=dict)


def _encode_floats(values) -> list[str]:
    return [repr(float(v)) for v in values]


def _decode_floats(values) -> list[float]:
    return [float(v) for v in values]


def to_document(ckpt: PolicyCheckpoint) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "algorithm": ckpt.algorithm,
        "scenario": ckpt.scenario,
        "obs_dim": ckpt.obs_dim,
        "act_dim": ckpt.act_dim,
        "policy": {
            "sizes": list(ckpt.policy_sizes),
            "activation": ckpt.policy_activation,
            "params": _encode_floats(ckpt.policy_params),
        },
        "extra_nets": {
            name: {
                "sizes": list(net["sizes"]),
                "activation": net["activation"],
                "params": _encode_floats(net["params"]),
            }
            for name, net in sorted(ckpt.extra_nets.items())
        },
        "metadata": ckpt.metadata,
    }


def to_bytes(ckpt: PolicyCheckpoint) -> bytes:
    return json.dumps(to_document(ckpt), sort_keys=True,
                      separators=(",", ":")).encode()


def from_document(doc: dict) -> PolicyCheckpoint:
    if not isinstance(doc, dict) or "format_version" not in doc:
        raise CheckpointError("not a checkpoint document")
    if doc["format_version"] != FORMAT_VERSION:
        raise CheckpointError(
            f"unsupported format version {doc['format_version']!r}")
    try:
        pol = doc["policy"]
        ckpt = PolicyCheckpoint(
            algorithm=doc["algorithm"],
            scenario=doc["scenario"],
            obs_dim=int(doc["obs_dim"]),
            act_dim=int(doc["act_dim"]),
            policy_sizes=tuple(int(s) for s in pol["sizes"]),
            policy_activation=pol["activation"],
            policy_params=_decode_floats(pol["params"]),
            extra_nets={
                name: {"sizes": tuple(int(s) for s in net["sizes"]),
                       "activation": net["activation"],
                       "params": _decode_floats(net["params"])}
                for name, net in doc.get("extra_nets", {}).items()
            },
            metadata=doc.get("metadata", {}),
        )
    except (KeyError, TypeError) as exc:
        raise CheckpointError(f"malformed checkpoint: {exc}") from exc
    n_expected = sum(a * b + b for a, b in
                     zip(ckpt.policy_sizes, ckpt.policy_sizes[1:]))
    if len(ckpt.policy_params) != n_expected:
        raise CheckpointError("policy parameter count mismatch")
    return ckpt


def save_checkpoint(path, ckpt: PolicyCheckpoint) -> None:
    Path(path).write_bytes(to_bytes(ckpt))


def load_checkpoint(path) -> PolicyCheckpoint:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"invalid JSON: {exc}") from exc
    return from_document(doc)


def policy_from_checkpoint(ckpt: PolicyCheckpoint) -> GaussianPolicy:
    sizes = ckpt.policy_sizes
    if sizes[0] != ckpt.obs_dim or sizes[-1] != 2 * ckpt.act_dim:
        raise CheckpointError("policy sizes inconsistent with dimensions")
    policy = GaussianPolicy(ckpt.obs_dim, ckpt.act_dim, hidden=sizes[1:-1],
                            activation=ckpt.policy_activation,
                            rng=np.random.default_rng(0))
    policy.net.set_flat(np.asarray(ckpt.policy_params))
    return policy


def _net_entry(net: Mlp) -> dict:
    return {"sizes": net.sizes, "activation": net.activation,
            "params": net.get_flat().tolist()}


def checkpoint_from_ppo(agent, scenario: str, metadata: dict | None = None
                        ) -> PolicyCheckpoint:
    return PolicyCheckpoint(
        algorithm="ppo", scenario=scenario,
        obs_dim=agent.policy.obs_dim, act_dim=agent.policy.act_dim,
        policy_sizes=agent.policy.net.sizes,
        policy_activation=agent.policy.net.activation,
        policy_params=agent.policy.net.get_flat().tolist(),
        extra_nets={"value": _net_entry(agent.value_net)},
        metadata=metadata or {})


def checkpoint_from_sac(agent, scenario: str, metadata: dict | None = None
                        ) -> PolicyCheckpoint:
    return PolicyCheckpoint(
        algorithm="sac", scenario=scenario,
        obs_dim=agent.policy.obs_dim, act_dim=agent.policy.act_dim,
        policy_sizes=agent.policy.net.sizes,
        policy_activation=agent.policy.net.activation,
        policy_params=agent.policy.net.get_flat().tolist(),
        extra_nets={"q1": _net_entry(agent.q1), "q2": _net_entry(agent.q2),
                    "q1_target": _net_entry(agent.q1_target),
                    "q2_target": _net_entry(agent.q2_target)},
        metadata=metadata or {})
