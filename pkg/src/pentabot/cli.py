"""Command-line entry point: region analysis, training, evaluation,
transport runs, the scaling calculator, and the live server."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from . import stability
from .config import ConfigError, load_config, run_config_from
from .scaling import ScalingQuery, report_paper_scenarios, scaled_radius
from .scene import preset_scene
from .training import evaluate, train, transport_eval

PPO_3D_CAVEAT = ("note: the published experiments report that PPO does not "
                 "converge in the 3D scenario (SAC is used there); "
                 "proceeding anyway.")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pentabot",
        description="Magnetic-levitation simulator and DRL control toolkit")
    parser.add_argument("--config", default=None,
                        help="YAML config file (default: $PENTABOT_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze-region",
                       help="scan the statically controllable region")
    p.add_argument("--scenario", default="2d-paper")
    p.add_argument("--resolution", type=float, default=0.01,
                   help="cell size in meters")
    p.add_argument("--current-steps", type=int, default=21,
                   help="current grid points per coil")
    p.add_argument("--out", default="region", help="output directory")

    for name in ("train", "eval", "transport"):
        p = sub.add_parser(name)
        p.add_argument("--algo", choices=("ppo", "sac"), default=None)
        p.add_argument("--scenario", default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--checkpoint", default=None)
        p.add_argument("--out", default=None, help="output directory")
        if name == "eval":
            p.add_argument("--episodes", type=int, default=20)

    p = sub.add_parser("scale", help="electromagnet scaling calculator")
    p.add_argument("--base-m0", type=float, default=1.0,
                   help="base dipole strength (A*m^2)")
    p.add_argument("--base-r0", type=float, default=1.0,
                   help="base control radius (m)")
    p.add_argument("--new-m0", type=float, default=None,
                   help="new dipole strength (A*m^2)")
    p.add_argument("--csv", default=None, help="also write ratios as CSV")

    p = sub.add_parser("serve", help="run the live control service")
    p.add_argument("--scenario", default=None)
    p.add_argument("--checkpoint", default=None)
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--speed", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    return parser


def cmd_analyze_region(args, cfg) -> int:
    if args.resolution <= 0:
        print("error: --resolution must be positive", file=sys.stderr)
        return 2
    if args.current_steps < 2:
        print("error: --current-steps must be at least 2", file=sys.stderr)
        return 2
    scene = preset_scene(args.scenario, remap_enabled=cfg["scene"]["remap"])
    grid = stability.default_current_grid(scene, steps=args.current_steps)
    region = stability.scan_controllable_region(scene, grid,
                                                resolution=args.resolution)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stability.save_region_map(region, out / "region.map")
    stability.export_csv(region, out / "region.csv")
    cells = int(region.grid.sum())
    area = stability.region_area(region)
    unit = "m^2" if region.grid.ndim == 2 else "m^3"
    print(f"scenario {args.scenario}: {cells} controllable cells of "
          f"{region.grid.size}, area {area:.6g} {unit}")
    print(f"wrote {out / 'region.map'} and {out / 'region.csv'}")
    return 0


def cmd_train(args, cfg) -> int:
    run_cfg = run_config_from(cfg, algorithm=args.algo,
                              scenario=args.scenario, total_steps=args.steps,
                              seed=args.seed, checkpoint_dir=args.out)
    if run_cfg.algorithm == "ppo" and run_cfg.scenario == "3d-paper":
        print(PPO_3D_CAVEAT)
    ckpt, metrics = train(run_cfg)
    last = metrics[-1] if metrics else {}
    print(f"trained {run_cfg.algorithm} on {run_cfg.scenario} for "
          f"{run_cfg.total_steps} steps; final metrics: {last}")
    if run_cfg.checkpoint_dir:
        print(f"checkpoint directory: {run_cfg.checkpoint_dir}")
    return 0


def cmd_eval(args, cfg) -> int:
    if not args.checkpoint:
        print("error: --checkpoint is required for eval", file=sys.stderr)
        return 2
    scenario = args.scenario or cfg["scene"]["scenario"]
    report = evaluate(args.checkpoint, scenario, args.episodes,
                      seed=args.seed or 0, remap=cfg["scene"]["remap"])
    rel = ", ".join(f"{e:.4f}" for e in report.mean_rel_error)
    print(f"episodes: {report.episode_count}")
    print(f"mean relative error per axis: [{rel}]")
    print(f"mean speed: {report.mean_speed_mm_s:.2f} mm/s")
    print(f"success rate: {report.success_rate:.3f}")
    return 0


def cmd_transport(args, cfg) -> int:
    if not args.checkpoint:
        print("error: --checkpoint is required for transport",
              file=sys.stderr)
        return 2
    scenario = args.scenario or "2d-paper"
    report, events = transport_eval(args.checkpoint, scenario,
                                    seed=args.seed or 0,
                                    remap=cfg["scene"]["remap"])
    for e in events:
        print(f"  step {e['step']:6d}  {e['event']}"
              + (f"  {e.get('detail')}" if e.get("detail") else ""))
    rel = ", ".join(f"{e:.4f}" for e in report.mean_rel_error)
    print(f"legs completed: {report.success_rate * report.episode_count:.0f}"
          f"/{report.episode_count}")
    print(f"mean relative tracking error per axis: [{rel}]")
    return 0


def cmd_scale(args, cfg) -> int:
    query = None
    if args.new_m0 is not None:
        query = ScalingQuery(base_dipole=args.base_m0,
                             base_radius=args.base_r0, base_payload=8e-4,
                             new_dipole=args.new_m0)
    print(report_paper_scenarios(query))
    if args.csv and query is not None:
        with open(args.csv, "w") as f:
            f.write("base_m0,base_r0,new_m0,scaled_radius\n")
            f.write(f"{args.base_m0!r},{args.base_r0!r},"
                    f"{args.new_m0!r},{scaled_radius(query)!r}\n")
        print(f"wrote {args.csv}")
    return 0


def cmd_serve(args, cfg) -> int:
    from .server import serve

    checkpoint = args.checkpoint or cfg["server"].get("checkpoint")
    if not checkpoint:
        print("error: --checkpoint is required for serve", file=sys.stderr)
        return 2
    scenario = args.scenario or cfg["scene"]["scenario"]
    port = args.port if args.port is not None else cfg["server"]["port"]
    if not 0 < port < 65536:
        print(f"error: invalid port {port}", file=sys.stderr)
        return 2
    try:
        serve(scenario, checkpoint,
              host=args.host or cfg["server"]["host"], port=port,
              speed=args.speed if args.speed is not None
              else cfg["server"]["speed"], seed=args.seed)
    except KeyboardInterrupt:
        pass
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    config_path = args.config or os.environ.get("PENTABOT_CONFIG")
    try:
        cfg = load_config(config_path)
    except (ConfigError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    handler = {
        "analyze-region": cmd_analyze_region,
        "train": cmd_train,
        "eval": cmd_eval,
        "transport": cmd_transport,
        "scale": cmd_scale,
        "serve": cmd_serve,
    }[args.command]
    try:
        return handler(args, cfg)
    except (ValueError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
