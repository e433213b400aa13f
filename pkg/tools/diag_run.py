"""Diagnostic pilot: train, save the checkpoint, then break evaluation
down per target segment to see where criterion-7 error comes from."""
import sys, time, json
sys.path.insert(0, "/root/pkg/src")
import numpy as np
from pentabot.training import RunConfig, train, CurriculumSchedule
from pentabot.environment import RewardParams
from pentabot.training import _make_env
from pentabot.checkpoint import policy_from_checkpoint, save_checkpoint
from pentabot.ppo import PpoConfig

seed = int(sys.argv[1])
tag = sys.argv[2]
kw = json.loads(sys.argv[3]) if len(sys.argv) > 3 else {}
kw["hidden"] = tuple(kw.get("hidden", (128, 128)))

t0 = time.time()
cfg = RunConfig(algorithm="ppo", scenario="2d-paper", total_steps=300_000,
                seed=seed, eval_interval=100_000, eval_episodes=5,
                agent_config=PpoConfig(**kw))
ckpt, metrics = train(cfg)
t1 = time.time()
save_checkpoint(f"/root/pkg/tools/pilot/{tag}_seed{seed}.ckpt.json", ckpt)

policy = policy_from_checkpoint(ckpt)
env = _make_env("2d-paper", True)
rp = RewardParams(sigma_p=CurriculumSchedule().phases[-1][1],
                  sigma_v=CurriculumSchedule().phases[-1][2])
env.reward_params = rp

segments = []
terminated_eps = 0
for ep in range(20):
    obs = env.reset(seed=seed + 500 + ep)
    done = False
    seg = {"start_dist": float(np.linalg.norm((env.state.position - env.target)[:2])),
           "errs": [], "speeds": [], "min_dist": np.inf, "hold": 0, "best_hold": 0}
    while not done:
        a = policy.act(obs, deterministic=True)[0]
        target = env.target.copy()
        obs, r, term, trunc, info = env.step(a)
        s = env.state
        d = float(np.linalg.norm((s.position - target)[:2]))
        v = float(np.linalg.norm(s.velocity[:2])) * 1000.0
        seg["min_dist"] = min(seg["min_dist"], d)
        seg["errs"].append(d)
        seg["speeds"].append(v)
        if d <= rp.sigma_p and v < rp.sigma_v:
            seg["hold"] += 1
            seg["best_hold"] = max(seg["best_hold"], seg["hold"])
        else:
            seg["hold"] = 0
        done = term or trunc
        if term:
            terminated_eps += 1
        if info.get("target_resampled") or done:
            n = len(seg["errs"])
            segments.append({
                "start_dist": seg["start_dist"],
                "steps": n,
                "late_err": float(np.mean(seg["errs"][100:])) if n > 100 else None,
                "final_err": float(np.mean(seg["errs"][-20:])),
                "min_dist": seg["min_dist"],
                "peak_speed": float(np.max(seg["speeds"])),
                "final_speed": float(np.mean(seg["speeds"][-20:])),
                "best_hold": seg["best_hold"],
                "terminated": bool(term),
            })
            if not done:
                seg = {"start_dist": float(np.linalg.norm((env.state.position - env.target)[:2])),
                       "errs": [], "speeds": [], "min_dist": np.inf,
                       "hold": 0, "best_hold": 0}

held = sum(1 for s in segments if s["best_hold"] >= 100)
late = [s["late_err"] for s in segments if s["late_err"] is not None]
out = {
    "seed": seed, "tag": tag, "kw": {k: list(v) if isinstance(v, tuple) else v for k, v in kw.items()},
    "train_s": round(t1 - t0, 1),
    "metrics": metrics,
    "segments": len(segments),
    "terminated_episodes": terminated_eps,
    "success": held / len(segments),
    "mean_late_err": float(np.mean(late)),
    "start_dist_mean": float(np.mean([s["start_dist"] for s in segments])),
    "reach_rate_0.05": sum(1 for s in segments if s["min_dist"] <= 0.05) / len(segments),
    "worst10": sorted(segments, key=lambda s: -(s["late_err"] or 0))[:10],
    "best10": sorted(segments, key=lambda s: (s["late_err"] if s["late_err"] is not None else np.inf))[:10],
}
with open(f"/root/pkg/tools/pilot/{tag}_seed{seed}_diag.json", "w") as f:
    json.dump(out, f, indent=2)
print(json.dumps({k: v for k, v in out.items() if k not in ("worst10", "best10", "metrics", "segments")}, indent=2))
