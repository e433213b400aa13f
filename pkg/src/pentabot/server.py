"""Live control service.

A single asyncio control loop owns the session: it runs the policy at
the 10 ms control period, applies queued client commands at tick
boundaries, and broadcasts state snapshots to every connected WebSocket
client at 20 Hz (scaled by the speed factor).  Network handlers never
touch session state directly — commands go in through a queue, snapshots
come out through per-client queues.
"""

from __future__ import annotations

import asyncio
import contextlib
import json
import time

import numpy as np
from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from . import simulator
from .checkpoint import PolicyCheckpoint, load_checkpoint, policy_from_checkpoint
from .environment import EpisodeConfig, MaglevEnv, default_episode_config
from .simulator import CONTROL_DT, LoadStateError
from .scene import preset_scene

SNAPSHOT_WALL_PERIOD = 0.05     # 20 Hz
COMMAND_TYPES = ("set_target", "attach_load", "detach_load", "pause",
                 "resume", "reset", "set_speed")


class Session:
    """All mutable service state; drive it with apply_command()/tick().

    Pure of wall-clock concerns: replaying the same command timeline at
    the same tick indices reproduces identical trajectories.
    """

    def __init__(self, scenario: str, checkpoint, seed: int = 0,
                 speed: float = 1.0):
        ckpt = (checkpoint if isinstance(checkpoint, PolicyCheckpoint)
                else load_checkpoint(checkpoint))
        scene = preset_scene(scenario)
        episode = default_episode_config(
            scene, max_steps=10**9, target_resample_interval=10**9)
        self.env = MaglevEnv(scene, episode)
        if ckpt.obs_dim != self.env.obs_dim or ckpt.act_dim != self.env.act_dim:
            raise ValueError("checkpoint incompatible with scenario")
        if speed <= 0.0:
            raise ValueError("speed factor must be positive")
        self.scenario = scenario
        self.policy = policy_from_checkpoint(ckpt)
        self.seed = seed
        self.speed = speed
        self.running = True
        self.snapshot_seq = 0
        self.tick_count = 0
        self.sim_time = 0.0
        self.client_count = 0
        self.last_action = np.zeros(self.env.act_dim)
        self.obs = self.env.reset(seed=seed)

    # -- protocol documents --------------------------------------------

    @property
    def dims(self) -> int:
        return self.env.dims

    def hello(self) -> dict:
        scene = self.env.scene
        d = self.dims
        return {
            "type": "hello",
            "scenario": self.scenario,
            "workspace": {
                "min": [float(x) for x in scene.workspace_min[:d]],
                "max": [float(x) for x in scene.workspace_max[:d]],
            },
            "coils": [
                {"position": [float(x) for x in c.position[:d]],
                 "axis": [float(x) for x in c.axis[:d]],
                 "polarity": c.polarity}
                for c in scene.coils
            ],
        }

    def snapshot(self) -> dict:
        self.snapshot_seq += 1
        s = self.env.state
        d = self.dims
        err = float(np.linalg.norm((s.position - self.env.target)[:d]))
        currents = [
            float(c.current_range[0]
                  + a * (c.current_range[1] - c.current_range[0]))
            for c, a in zip(self.env.scene.coils, self.last_action)]
        return {
            "type": "state",
            "seq": self.snapshot_seq,
            "t": self.sim_time,
            "pos": [float(x) for x in s.position[:d]],
            "vel": [float(x) for x in s.velocity[:d]],
            "target": [float(x) for x in self.env.target[:d]],
            "currents": currents,
            "load_g": s.load_mass * 1000.0,
            "err": err,
        }

    # -- commands ------------------------------------------------------

    def apply_command(self, msg: dict) -> dict:
        seq = msg.get("seq") if isinstance(msg, dict) else None
        try:
            if not isinstance(msg, dict) or "type" not in msg:
                raise ValueError("message must be an object with a type")
            if not isinstance(seq, int):
                raise ValueError("missing integer seq")
            mtype = msg["type"]
            if mtype not in COMMAND_TYPES:
                raise ValueError(f"unknown command type {mtype!r}")
            note = getattr(self, f"_cmd_{mtype}")(msg)
        except (ValueError, KeyError, TypeError, LoadStateError) as exc:
            return {"type": "ack", "seq": seq if isinstance(seq, int) else -1,
                    "ok": False, "reason": str(exc)}
        ack = {"type": "ack", "seq": seq, "ok": True}
        if note:
            ack["reason"] = note
        return ack

    def _cmd_set_target(self, msg) -> str:
        pos = msg["pos"]
        if len(pos) != self.dims:
            raise ValueError(f"pos must have {self.dims} elements")
        t = np.zeros(3)
        t[: self.dims] = [float(x) for x in pos]
        before = t.copy()
        self.env.set_target(t)
        clamped = not np.allclose(self.env.target, before)
        return "clamped" if clamped else ""

    def _cmd_attach_load(self, msg) -> str:
        mass_g = float(msg["mass_g"])
        s = self.env.state
        self.env._state = simulator.attach_load(
            self.env.scene, s, mass_g / 1000.0, s.position)
        return ""

    def _cmd_detach_load(self, msg) -> str:
        self.env._state = simulator.detach_load(self.env.scene,
                                                self.env.state)
        return ""

    def _cmd_pause(self, msg) -> str:
        self.running = False
        return ""

    def _cmd_resume(self, msg) -> str:
        self.running = True
        return ""

    def _cmd_reset(self, msg) -> str:
        self.obs = self.env.reset(seed=self.seed)
        self.sim_time = 0.0
        self.last_action = np.zeros(self.env.act_dim)
        return ""

    def _cmd_set_speed(self, msg) -> str:
        factor = float(msg["factor"])
        if factor <= 0.0:
            raise ValueError("speed factor must be positive")
        self.speed = factor
        return ""

    # -- physics -------------------------------------------------------

    def tick(self) -> None:
        """Advance one 10 ms control period (no-op while paused)."""
        if not self.running:
            return
        action = self.policy.act(self.obs, deterministic=True)[0]
        self.last_action = action
        self.obs, _, terminated, truncated, _ = self.env.step(action)
        self.tick_count += 1
        self.sim_time += CONTROL_DT
        if terminated or truncated:
            # ball left the workspace: respawn, keep the session alive
            self.obs = self.env.reset()
            self.last_action = np.zeros(self.env.act_dim)


class ControlLoop:
    """Owns the session; mediates all access through asyncio queues."""

    def __init__(self, session: Session, realtime: bool = True):
        self.session = session
        self.realtime = realtime
        self.commands: asyncio.Queue = asyncio.Queue()
        self.clients: dict[int, asyncio.Queue] = {}
        self._next_client = 0
        self._stop = False

    def add_client(self) -> tuple[int, asyncio.Queue]:
        cid = self._next_client
        self._next_client += 1
        q: asyncio.Queue = asyncio.Queue(maxsize=256)
        self.clients[cid] = q
        self.session.client_count = len(self.clients)
        return cid, q

    def remove_client(self, cid: int) -> None:
        self.clients.pop(cid, None)
        self.session.client_count = len(self.clients)

    def _broadcast(self, doc: dict) -> None:
        text = json.dumps(doc)
        for q in self.clients.values():
            if not q.full():
                q.put_nowait(text)

    async def run(self) -> None:
        session = self.session
        # snapshot every ceil(20 Hz wall) worth of sim ticks
        next_deadline = time.monotonic()
        wall_snapshot = time.monotonic()
        while not self._stop:
            while not self.commands.empty():
                cid, msg = self.commands.get_nowait()
                ack = session.apply_command(msg)
                q = self.clients.get(cid)
                if q is not None and not q.full():
                    q.put_nowait(json.dumps(ack))
            session.tick()
            now = time.monotonic()
            snap_ticks = max(1, round(SNAPSHOT_WALL_PERIOD * session.speed
                                      / CONTROL_DT))
            if (session.tick_count % snap_ticks == 0
                    or now - wall_snapshot >= SNAPSHOT_WALL_PERIOD):
                self._broadcast(session.snapshot())
                wall_snapshot = now
            if self.realtime:
                next_deadline += CONTROL_DT / session.speed
                delay = next_deadline - time.monotonic()
                if delay > 0:
                    await asyncio.sleep(delay)
                else:
                    next_deadline = time.monotonic()
                    await asyncio.sleep(0)
            else:
                await asyncio.sleep(0)

    def stop(self) -> None:
        self._stop = True


def create_app(session: Session, realtime: bool = True):
    """FastAPI application speaking the wire protocol at /ws."""
    loop = ControlLoop(session, realtime=realtime)

    @contextlib.asynccontextmanager
    async def lifespan(app):
        task = asyncio.create_task(loop.run())
        try:
            yield
        finally:
            loop.stop()
            task.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await task

    app = FastAPI(lifespan=lifespan)
    app.state.control_loop = loop

    @app.websocket("/ws")
    async def ws_endpoint(ws: WebSocket):
        await ws.accept()
        cid, outbox = loop.add_client()
        await ws.send_text(json.dumps(session.hello()))

        async def pump_out():
            while True:
                await ws.send_text(await outbox.get())

        sender = asyncio.create_task(pump_out())
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                except json.JSONDecodeError:
                    msg = {"type": "invalid", "seq": -1}
                await loop.commands.put((cid, msg))
        except WebSocketDisconnect:
            pass
        finally:
            sender.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await sender
            loop.remove_client(cid)

    return app


def serve(scenario: str, checkpoint, host: str = "127.0.0.1",
          port: int = 8000, speed: float = 1.0, seed: int = 0) -> None:
    """Blocking entry point: run the service until interrupted."""
    import uvicorn

    session = Session(scenario, checkpoint, seed=seed, speed=speed)
    app = create_app(session)
    uvicorn.run(app, host=host, port=port, log_level="warning")
