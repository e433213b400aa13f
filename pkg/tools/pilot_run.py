"""Pilot: criterion-7 style PPO run with variant hyperparameters."""
import sys, time, json
sys.path.insert(0, "/root/pkg/src")
import numpy as np
from pentabot.training import RunConfig, train, evaluate
from pentabot.ppo import PpoConfig
from pentabot.checkpoint import save_checkpoint

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
report = evaluate(ckpt, "2d-paper", 20, seed=seed + 500)
out = {
    "seed": seed, "tag": tag, "kw": {k: list(v) if isinstance(v, tuple) else v for k, v in kw.items()},
    "train_s": round(t1 - t0, 1),
    "metrics": metrics,
    "rel_err": [float(x) for x in report.mean_rel_error],
    "mean_rel_err": float(report.mean_rel_error.mean()),
    "speed": report.mean_speed_mm_s,
    "success": report.success_rate,
}
print(json.dumps(out, indent=2))
with open(f"/root/pkg/tools/pilot/{tag}_seed{seed}.json", "w") as f:
    json.dump(out, f, indent=2)
