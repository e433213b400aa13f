"""Run orchestration: curriculum training loops for both learners,
deterministic evaluation against the multi-target protocol, the transport
task, metrics CSV logging, and run manifests."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .checkpoint import (
    PolicyCheckpoint,
    checkpoint_from_ppo,
    checkpoint_from_sac,
    load_checkpoint,
    policy_from_checkpoint,
    save_checkpoint,
)
from .environment import (
    CurriculumSchedule,
    EpisodeConfig,
    MaglevEnv,
    RewardParams,
    apply_curriculum,
    default_episode_config,
)
from .ppo import PpoAgent, PpoConfig
from .sac import SacAgent, SacConfig
from .scene import preset_scene
from .simulator import CONTROL_DT

#: Width of the scanned controllable range used to normalize errors (m).
CONTROLLABLE_RANGE = 0.3

#: Steps excluded after each target switch before hold error is measured
#: (1 s at the 10 ms control period).
SETTLE_STEPS = 100

#: Consecutive in-tolerance steps required to count a target as held.
SUCCESS_HOLD_STEPS = 100

METRICS_COLUMNS = ("global_step", "mean_reward", "mean_abs_error_m",
                   "mean_speed_mm_s", "success_rate")

#: Orchestrator-level PPO settings for tracking runs, found by a
#: hyperparameter sweep on the 2d-paper scene: a slightly longer credit
#: horizon than the algorithm-level default rewards travelling to far
#: targets, the reduced initial exploration noise avoids workspace
#: exits, and the linear learning-rate decay stabilizes the tight final
#: curriculum phase.  Algorithm-level defaults in PpoConfig stay at the
#: conventional values.
TRACKING_PPO_OVERRIDES = {"gamma": 0.995, "init_log_std": -1.0,
                          "lr_decay": True}


def default_ppo_training_config() -> PpoConfig:
    return PpoConfig(**TRACKING_PPO_OVERRIDES)


class TrainingDivergenceError(RuntimeError):
    """A loss went non-finite; the offending batch was dumped to disk."""


@dataclass
class RunConfig:
    algorithm: str = "ppo"          # "ppo" | "sac"
    scenario: str = "2d-paper"      # "2d-paper" | "3d-paper"
    total_steps: int = 300_000
    curriculum: CurriculumSchedule | None = None  # None: scale to 3 phases
    seed: int = 0
    eval_interval: int = 50_000
    eval_episodes: int = 5
    checkpoint_dir: str | None = None
    remap: bool = True
    agent_config: object | None = None  # PpoConfig or SacConfig

    def __post_init__(self):
        if self.algorithm not in ("ppo", "sac"):
            raise ValueError("algorithm must be 'ppo' or 'sac'")
        if self.total_steps <= 0:
            raise ValueError("total_steps must be positive")
        if not 0 < self.eval_interval <= self.total_steps:
            raise ValueError("eval_interval must be in (0, total_steps]")

    def resolved_curriculum(self) -> CurriculumSchedule:
        if self.curriculum is not None:
            return self.curriculum
        phases = len(CurriculumSchedule().phases)
        return CurriculumSchedule().scaled(max(1, self.total_steps // phases))


@dataclass
class EvalReport:
    mean_rel_error: np.ndarray      # per active axis, error / 0.3 m
    mean_speed_mm_s: float
    success_rate: float
    episode_count: int
    mean_abs_error_m: float = 0.0
    mean_reward: float = 0.0

    def __post_init__(self):
        self.mean_rel_error = np.asarray(self.mean_rel_error, dtype=float)
        if not 0.0 <= self.success_rate <= 1.0:
            raise ValueError("success_rate must be in [0, 1]")
        if np.any(self.mean_rel_error < 0.0):
            raise ValueError("errors must be nonnegative")


def _make_env(scenario: str, remap: bool,
              episode: EpisodeConfig | None = None) -> MaglevEnv:
    scene = preset_scene(scenario, remap_enabled=remap)
    return MaglevEnv(scene, episode or default_episode_config(scene))


def _dump_divergence(directory, batch) -> Path:
    directory = Path(directory or ".")
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / "divergence_dump.npz"
    arrays = {k: np.asarray(v) for k, v in batch.items()
              if isinstance(v, np.ndarray)}
    np.savez(path, **arrays)
    return path


def train(config: RunConfig):
    """Run the configured algorithm with curriculum reward widths.

    Returns (final PolicyCheckpoint, metrics rows).  If a checkpoint
    directory is set, writes a checkpoint and metrics.csv row at every
    evaluation, plus a manifest of the resolved configuration.
    """
    schedule = config.resolved_curriculum()
    env = _make_env(config.scenario, config.remap)
    metrics: list[dict] = []
    ckpt_dir = Path(config.checkpoint_dir) if config.checkpoint_dir else None
    if ckpt_dir:
        ckpt_dir.mkdir(parents=True, exist_ok=True)
        manifest = {
            "algorithm": config.algorithm, "scenario": config.scenario,
            "total_steps": config.total_steps, "seed": config.seed,
            "eval_interval": config.eval_interval,
            "eval_episodes": config.eval_episodes, "remap": config.remap,
            "curriculum": [list(p) for p in schedule.phases],
        }
        (ckpt_dir / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True))

    if config.algorithm == "ppo":
        ckpt = _train_ppo(config, env, schedule, metrics, ckpt_dir)
    else:
        ckpt = _train_sac(config, env, schedule, metrics, ckpt_dir)

    if ckpt_dir:
        save_checkpoint(ckpt_dir / "final.json", ckpt)
        _write_metrics_csv(ckpt_dir / "metrics.csv", metrics)
    return ckpt, metrics


def _write_metrics_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRICS_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: repr(row[k]) if isinstance(row[k], float)
                             else row[k] for k in METRICS_COLUMNS})


def _record_eval(config, ckpt, global_step, recent_rewards, metrics,
                 ckpt_dir) -> None:
    report = evaluate(ckpt, config.scenario, config.eval_episodes,
                      seed=config.seed + 10_000, remap=config.remap)
    row = {"global_step": global_step,
           "mean_reward": float(np.mean(recent_rewards))
           if len(recent_rewards) else 0.0,
           "mean_abs_error_m": report.mean_abs_error_m,
           "mean_speed_mm_s": report.mean_speed_mm_s,
           "success_rate": report.success_rate}
    metrics.append(row)
    if ckpt_dir:
        save_checkpoint(ckpt_dir / f"step_{global_step:09d}.json", ckpt)


def _check_finite(diag: dict, batch, ckpt_dir) -> None:
    bad = {k: v for k, v in diag.items()
           if isinstance(v, float) and not np.isfinite(v)}
    if bad:
        path = _dump_divergence(ckpt_dir, batch)
        raise TrainingDivergenceError(
            f"non-finite losses {bad}; batch dumped to {path}")


def _train_ppo(config, env, schedule, metrics, ckpt_dir) -> PolicyCheckpoint:
    agent = PpoAgent(env.obs_dim, env.act_dim,
                     config.agent_config or default_ppo_training_config(),
                     seed=config.seed)
    obs = env.reset(seed=config.seed)
    global_step = 0
    next_eval = config.eval_interval
    while global_step < config.total_steps:
        env.reward_params = apply_curriculum(schedule, global_step)
        agent.set_progress(global_step / config.total_steps)
        n = min(agent.cfg.rollout_steps, config.total_steps - global_step)
        batch, obs = agent.collect_rollout(env, n, obs)
        diag = agent.update(batch)
        _check_finite(diag, batch, ckpt_dir)
        global_step += n
        if global_step >= next_eval:
            ckpt = checkpoint_from_ppo(agent, config.scenario,
                                       {"global_step": global_step})
            _record_eval(config, ckpt, global_step, batch["rewards"],
                         metrics, ckpt_dir)
            next_eval += config.eval_interval
    return checkpoint_from_ppo(agent, config.scenario,
                               {"global_step": global_step})


def _train_sac(config, env, schedule, metrics, ckpt_dir) -> PolicyCheckpoint:
    agent = SacAgent(env.obs_dim, env.act_dim,
                     config.agent_config or SacConfig(), seed=config.seed)
    cfg = agent.cfg
    obs = env.reset(seed=config.seed)
    recent_rewards: list[float] = []
    next_eval = config.eval_interval
    for global_step in range(1, config.total_steps + 1):
        env.reward_params = apply_curriculum(schedule, global_step - 1)
        if global_step <= cfg.start_steps:
            action = agent.rng.uniform(0.0, 1.0, size=env.act_dim)
        else:
            action = agent.select_action(obs)
        next_obs, r, terminated, truncated, _ = env.step(action)
        agent.replay.add(obs, action, r, next_obs, terminated)
        recent_rewards.append(r)
        if len(recent_rewards) > 2048:
            recent_rewards.pop(0)
        obs = env.reset() if (terminated or truncated) else next_obs
        if (global_step > cfg.start_steps
                and len(agent.replay) >= cfg.batch_size
                and global_step % cfg.update_every == 0):
            diag = agent.update()
            _check_finite(diag, {"obs": np.asarray(obs)}, ckpt_dir)
        if global_step >= next_eval:
            ckpt = checkpoint_from_sac(agent, config.scenario,
                                       {"global_step": global_step})
            _record_eval(config, ckpt, global_step, recent_rewards,
                         metrics, ckpt_dir)
            next_eval += config.eval_interval
    return checkpoint_from_sac(agent, config.scenario,
                               {"global_step": global_step})


# -- evaluation --------------------------------------------------------


def _resolve_checkpoint(checkpoint) -> PolicyCheckpoint:
    if isinstance(checkpoint, PolicyCheckpoint):
        return checkpoint
    return load_checkpoint(checkpoint)


def evaluate(checkpoint, scenario: str, n_episodes: int, seed: int = 0,
             remap: bool = True,
             reward_params: RewardParams | None = None) -> EvalReport:
    """Deterministic-policy evaluation under the multi-target protocol.

    Hold error is measured per target segment, skipping the first second
    after every target switch; a target counts as held when the actuator
    stays within sigma_p of it for 100 consecutive steps.  Segments
    shorter than the hold window (the tail of a truncated episode)
    cannot be held by definition and are excluded from the success
    denominator.
    """
    if n_episodes <= 0:
        raise ValueError("n_episodes must be positive")
    ckpt = _resolve_checkpoint(checkpoint)
    env = _make_env(scenario, remap)
    if ckpt.obs_dim != env.obs_dim or ckpt.act_dim != env.act_dim:
        raise ValueError(
            f"checkpoint dims ({ckpt.obs_dim}, {ckpt.act_dim}) do not match "
            f"scenario dims ({env.obs_dim}, {env.act_dim})")
    policy = policy_from_checkpoint(ckpt)
    rp = reward_params or RewardParams(
        sigma_p=CurriculumSchedule().phases[-1][1],
        sigma_v=CurriculumSchedule().phases[-1][2])
    env.reward_params = rp

    axis_errors: list[np.ndarray] = []
    speeds: list[float] = []
    rewards: list[float] = []
    segments_total = 0
    segments_held = 0
    for ep in range(n_episodes):
        obs = env.reset(seed=seed + ep)
        done = False
        seg_step = 0
        hold_run = 0
        held = False
        while not done:
            action = policy.act(obs, deterministic=True)[0]
            target = env.target.copy()
            obs, r, term, trunc, info = env.step(action)
            rewards.append(r)
            seg_step += 1
            s = env.state
            err = np.abs((s.position - target)[: env.dims])
            speed = float(np.linalg.norm(s.velocity[: env.dims])) * 1000.0
            if seg_step > SETTLE_STEPS:
                axis_errors.append(err)
                speeds.append(speed)
            if np.linalg.norm(err) <= rp.sigma_p:
                hold_run += 1
                if hold_run >= SUCCESS_HOLD_STEPS:
                    held = True
            else:
                hold_run = 0
            done = term or trunc
            if info.get("target_resampled") or done:
                if seg_step >= SUCCESS_HOLD_STEPS:
                    segments_total += 1
                    segments_held += int(held)
                seg_step = 0
                hold_run = 0
                held = False
    axis = (np.mean(axis_errors, axis=0) if axis_errors
            else np.full(env.dims, np.inf))
    return EvalReport(
        mean_rel_error=axis / CONTROLLABLE_RANGE,
        mean_speed_mm_s=float(np.mean(speeds)) if speeds else float("inf"),
        success_rate=segments_held / max(segments_total, 1),
        episode_count=n_episodes,
        mean_abs_error_m=float(np.mean(axis)) if axis_errors else float("inf"),
        mean_reward=float(np.mean(rewards)) if rewards else 0.0)


# -- transport task ----------------------------------------------------

#: Default two-stage transport script: carry the load lower -> upper,
#: return, then upper -> lower, return.  Both waypoints sit inside the
#: band where the coils can exert lateral force of either sign while
#: balancing the loaded weight (with a 1 g load the signed-authority
#: band shrinks to roughly |x| <= 0.04 m at y ~ 0.075-0.09; outside it
#: the loaded ball can only be pushed outward, so no controller could
#: start the carry leg).
LOWER_WAYPOINT = np.array([-0.035, 0.075, 0.0])
UPPER_WAYPOINT = np.array([0.035, 0.085, 0.0])
DEFAULT_TRANSPORT_SCRIPT = ((tuple(LOWER_WAYPOINT), tuple(UPPER_WAYPOINT)),
                            (tuple(UPPER_WAYPOINT), tuple(LOWER_WAYPOINT)))

#: The levitation target moves continuously between waypoints (like a
#: robot-arm end effector following a trajectory) instead of jumping,
#: so the controller always tracks a nearby target.
TRANSPORT_TARGET_SPEED = 0.04  # m/s along the waypoint path


def transport_eval(checkpoint, scenario: str = "2d-paper",
                   script=DEFAULT_TRANSPORT_SCRIPT, seed: int = 0,
                   load_mass: float = 1e-3, leg_budget: int = 600,
                   remap: bool = True):
    """Run the scripted pickup/drop legs with automatic attach/detach.

    Returns (EvalReport, event log).  Each script entry is a (pickup,
    drop) waypoint pair; after each drop the actuator returns to the next
    pickup point (or the first one after the last leg).  If the load is
    never attached within the per-leg step budget the result reports the
    failure in the event log and a zero success rate contribution.
    """
    if len(script) == 0:
        raise ValueError("waypoint script must not be empty")
    ckpt = _resolve_checkpoint(checkpoint)
    if scenario != "2d-paper":
        raise ValueError("transport task is defined for the 2d-paper scene")
    scene = preset_scene(scenario, remap_enabled=remap)
    first_pickup = np.asarray(script[0][0], dtype=float)
    episode = EpisodeConfig(
        max_steps=10 * leg_budget * len(script),
        target_resample_interval=10 * leg_budget * len(script),
        spawn_region=(first_pickup, first_pickup),
        transport_mode=True, load_mass=load_mass,
        load_position=tuple(first_pickup))
    env = MaglevEnv(scene, episode)
    if ckpt.obs_dim != env.obs_dim or ckpt.act_dim != env.act_dim:
        raise ValueError("checkpoint does not match scenario dimensions")
    policy = policy_from_checkpoint(ckpt)

    obs = env.reset(seed=seed)
    events: list[dict] = []
    axis_errors: list[np.ndarray] = []
    speeds: list[float] = []
    step_count = 0
    legs_done = 0

    def run_phase(target, stop_key, budget):
        """Ramp the levitation target continuously toward ``target`` and
        track it until the env reports ``stop_key`` (or just spend the
        budget when stop_key is None); collects errors after the
        settling second."""
        nonlocal obs, step_count
        events.append({"step": step_count, "event": "target",
                       "position": [float(x) for x in target]})
        tracked = env.target.copy()
        step_len = TRANSPORT_TARGET_SPEED * CONTROL_DT
        for i in range(budget):
            gap = target - tracked
            dist = float(np.linalg.norm(gap))
            if dist > 1e-12:
                tracked = tracked + gap / dist * min(step_len, dist)
                env.set_target(tracked)
            action = policy.act(obs, deterministic=True)[0]
            obs, _, term, trunc, info = env.step(action)
            step_count += 1
            s = env.state
            if i >= SETTLE_STEPS:
                axis_errors.append(np.abs((s.position - env.target)[:2]))
                speeds.append(float(np.linalg.norm(s.velocity[:2])) * 1000.0)
            for key in ("load_attached", "load_detached"):
                if info.get(key):
                    events.append({"step": step_count, "event": key,
                                   "position": [float(x) for x in s.position]})
            if term or trunc:
                return "terminated"
            if stop_key and info.get(stop_key):
                return "done"
        return "budget"

    outcome = "ok"
    for pickup, drop in script:
        env.load_position = np.asarray(pickup, dtype=float)
        env.drop_target = None
        status = run_phase(np.asarray(pickup, dtype=float), "load_attached",
                           leg_budget)
        if status != "done":
            outcome = f"pickup-failed:{status}"
            events.append({"step": step_count, "event": "task_failure",
                           "detail": outcome})
            break
        env.drop_target = np.asarray(drop, dtype=float)
        status = run_phase(np.asarray(drop, dtype=float), "load_detached",
                           leg_budget)
        if status != "done":
            outcome = f"drop-failed:{status}"
            events.append({"step": step_count, "event": "task_failure",
                           "detail": outcome})
            break
        legs_done += 1
        # return leg: head back to the pickup point, unloaded
        env.load_position = None
        env.drop_target = None
        if run_phase(np.asarray(pickup, dtype=float), None,
                     leg_budget // 2) == "terminated":
            outcome = "terminated-on-return"
            break

    axis = (np.mean(axis_errors, axis=0) if axis_errors
            else np.full(2, np.inf))
    report = EvalReport(
        mean_rel_error=axis / CONTROLLABLE_RANGE,
        mean_speed_mm_s=float(np.mean(speeds)) if speeds else float("inf"),
        success_rate=legs_done / len(script),
        episode_count=len(script),
        mean_abs_error_m=float(np.mean(axis)) if axis_errors else float("inf"))
    events.append({"step": step_count, "event": "finished",
                   "detail": outcome, "legs_done": legs_done})
    return report, events
