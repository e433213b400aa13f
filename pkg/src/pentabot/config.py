"""Declarative YAML configuration for the command-line entry point.

One key/value tree covering scene overrides, run settings, reward and
curriculum parameters, and server settings.  Unknown keys anywhere in
the tree are rejected; values are validated by constructing the target
module's own types at load time.
"""

from __future__ import annotations

from pathlib import Path

import yaml

from .environment import CurriculumSchedule, RewardParams
from .ppo import PpoConfig
from .sac import SacConfig
from .training import RunConfig


class ConfigError(ValueError):
    """Unknown key or invalid value in a configuration file."""


#: Allowed keys per section (None marks a leaf).
_SCHEMA = {
    "scene": {"scenario": None, "remap": None, "drag": None},
    "run": {"algorithm": None, "total_steps": None, "seed": None,
            "eval_interval": None, "eval_episodes": None,
            "checkpoint_dir": None},
    "curriculum": {"steps_per_phase": None},
    "reward": {"alpha": None},
    "ppo": {f.name: None for f in PpoConfig.__dataclass_fields__.values()},
    "sac": {f.name: None for f in SacConfig.__dataclass_fields__.values()},
    "server": {"host": None, "port": None, "speed": None,
               "checkpoint": None},
}


def _check_keys(tree: dict, schema: dict, path: str = "") -> None:
    if not isinstance(tree, dict):
        raise ConfigError(f"section {path or '<root>'} must be a mapping")
    for key, value in tree.items():
        if key not in schema:
            raise ConfigError(f"unknown key {path}{key!r}")
        sub = schema[key]
        if isinstance(sub, dict):
            _check_keys(value, sub, f"{path}{key}.")


DEFAULTS = {
    "scene": {"scenario": "2d-paper", "remap": True},
    "run": {"algorithm": "ppo", "total_steps": 300_000, "seed": 0,
            "eval_interval": 50_000, "eval_episodes": 5,
            "checkpoint_dir": None},
    "curriculum": {},
    "reward": {},
    "ppo": {},
    "sac": {},
    "server": {"host": "127.0.0.1", "port": 8000, "speed": 1.0},
}


def _merge(base: dict, override: dict) -> dict:
    out = {k: dict(v) for k, v in base.items()}
    for section, values in override.items():
        out.setdefault(section, {}).update(values or {})
    return out


def load_config(path=None) -> dict:
    """Parse and validate a config file; with no path, return defaults."""
    if path is None:
        return _merge(DEFAULTS, {})
    text = Path(path).read_text()
    try:
        tree = yaml.safe_load(text) or {}
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from exc
    _check_keys(tree, _SCHEMA)
    merged = _merge(DEFAULTS, tree)
    validate_config(merged)
    return merged


def validate_config(cfg: dict) -> None:
    """Eagerly construct the typed configs so bad values fail at load."""
    try:
        run_config_from(cfg)
        if cfg["reward"]:
            RewardParams(alpha=cfg["reward"].get("alpha", 1.0))
        if cfg["server"].get("speed", 1.0) <= 0:
            raise ValueError("server.speed must be positive")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def run_config_from(cfg: dict, **overrides) -> RunConfig:
    """Build a RunConfig from a validated tree, flags taking precedence."""
    run = dict(cfg["run"])
    run.update({k: v for k, v in overrides.items() if v is not None})
    algorithm = run.get("algorithm", "ppo")
    agent_config = None
    if cfg.get("ppo") and algorithm == "ppo":
        agent_config = PpoConfig(**{k: tuple(v) if k == "hidden" else v
                                    for k, v in cfg["ppo"].items()})
    if cfg.get("sac") and algorithm == "sac":
        agent_config = SacConfig(**{k: tuple(v) if k == "hidden" else v
                                    for k, v in cfg["sac"].items()})
    curriculum = None
    if cfg["curriculum"].get("steps_per_phase"):
        curriculum = CurriculumSchedule().scaled(
            int(cfg["curriculum"]["steps_per_phase"]))
    return RunConfig(
        algorithm=algorithm,
        scenario=run.get("scenario", cfg["scene"]["scenario"]),
        total_steps=int(run["total_steps"]),
        curriculum=curriculum,
        seed=int(run["seed"]),
        eval_interval=min(int(run["eval_interval"]), int(run["total_steps"])),
        eval_episodes=int(run["eval_episodes"]),
        checkpoint_dir=run.get("checkpoint_dir"),
        remap=bool(cfg["scene"]["remap"]),
        agent_config=agent_config,
    )
