"""Time-stepped dynamics of the levitated ball.

Semi-implicit Euler over 10 substeps per 10 ms control period; forces are
the per-coil soft-dipole contributions (optionally shaped by the
distance-based remap weight), gravity on actuator + load, and linear drag.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import magnetics
from .magnetics import COIL_EXCLUSION_RADIUS
from .scene import SceneConfig

CONTROL_DT = 0.01   # s, control period
N_SUBSTEPS = 10


class LoadStateError(RuntimeError):
    """Attach/detach precondition violated."""


@dataclass(frozen=True)
class ActuatorState:
    position: np.ndarray
    velocity: np.ndarray
    load_mass: float = 0.0
    time: float = 0.0
    terminated: bool = False
    currents_clamped: bool = False

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, dtype=float))
        object.__setattr__(self, "velocity", np.asarray(self.velocity, dtype=float))
        if self.load_mass < 0.0:
            raise ValueError("load_mass must be nonnegative")


def remap_weight(d_m_normalized: float) -> float:
    """Force-shaping weight w = min(d^2, 1) over the normalized distance."""
    if d_m_normalized < 0.0:
        raise ValueError("normalized distance must be nonnegative")
    return min(d_m_normalized * d_m_normalized, 1.0)


def coil_force_contributions(scene: SceneConfig, currents, position,
                             shaped: bool | None = None) -> np.ndarray:
    """Per-coil force contributions F_i on the ball, shape (n_coils, 3).

    The soft-dipole force F = k J^T B / |B| splits over coils through the
    per-coil Jacobians J_i (with the total field B), so the contributions
    sum to the exact total force.  When shaping is active each F_i is
    scaled by remap_weight(|p - p_coil| / d_ref).
    """
    if shaped is None:
        shaped = scene.remap.enabled
    B, J = magnetics.coil_fields(scene.coils, currents, position)
    Btot = B.sum(axis=0)
    nB = np.linalg.norm(Btot)
    if nB == 0.0:
        return np.zeros((len(scene.coils), 3))
    k = scene.actuator.dipole_strength
    F = k * (J @ Btot) / nB
    if shaped:
        d_ref = scene.remap.reference_distance
        p = np.asarray(position, dtype=float)
        for i, c in enumerate(scene.coils):
            d = np.linalg.norm(p - c.position) / d_ref
            F[i] *= remap_weight(d)
    return F


def shaped_coil_force(scene: SceneConfig, coil_index: int, current: float,
                      state: ActuatorState) -> np.ndarray:
    """Shaped force contribution of one coil at the current ball position."""
    if not scene.remap.enabled:
        raise ValueError("remapping is disabled for this scene")
    currents = np.zeros(len(scene.coils))
    currents[coil_index] = current
    F = coil_force_contributions(scene, currents, state.position, shaped=True)
    return F[coil_index]


def magnetic_force(scene: SceneConfig, currents, position,
                   shaped: bool | None = None) -> np.ndarray:
    return coil_force_contributions(scene, currents, position, shaped).sum(axis=0)


def _near_coil(scene: SceneConfig, p: np.ndarray) -> bool:
    return any(np.linalg.norm(p - c.position) < COIL_EXCLUSION_RADIUS
               for c in scene.coils)


def clamp_currents(scene: SceneConfig, currents) -> tuple[np.ndarray, bool]:
    currents = np.asarray(currents, dtype=float)
    lo = np.array([c.current_range[0] for c in scene.coils])
    hi = np.array([c.current_range[1] for c in scene.coils])
    clamped = np.clip(currents, lo, hi)
    return clamped, bool(np.any(clamped != currents))


def step(scene: SceneConfig, state: ActuatorState, action,
         dt: float = CONTROL_DT, n_sub: int = N_SUBSTEPS) -> ActuatorState:
    """Advance the ball by one control period under per-coil currents.

    Out-of-range currents are clamped (flagged on the returned state);
    leaving the workspace or entering a coil's exclusion radius terminates
    the episode without clamping the position.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    if state.terminated or not scene.in_workspace(state.position):
        return replace(state, terminated=True)

    currents, was_clamped = clamp_currents(scene, action)
    mass = scene.actuator.mass + state.load_mass
    h = dt / n_sub
    p = state.position.copy()
    v = state.velocity.copy()
    terminated = False

    for _ in range(n_sub):
        Fmag = magnetic_force(scene, currents, p)
        a = (Fmag + mass * scene.gravity - scene.drag * v) / mass
        v = v + a * h
        if scene.dimensionality == 2:
            v[2] = 0.0
        p = p + v * h
        if scene.dimensionality == 2:
            p[2] = 0.0
        if not scene.in_workspace(p) or _near_coil(scene, p):
            terminated = True
            break

    return ActuatorState(position=p, velocity=v, load_mass=state.load_mass,
                         time=state.time + dt, terminated=terminated,
                         currents_clamped=was_clamped)


def pickup_radius(scene: SceneConfig) -> float:
    return 2.0 * scene.actuator.radius


def attach_load(scene: SceneConfig, state: ActuatorState, mass: float,
                load_position) -> ActuatorState:
    """Attach a load lying at ``load_position``; ball must be within the
    pickup radius and currently unloaded."""
    if mass <= 0.0:
        raise ValueError("load mass must be positive")
    if state.load_mass > 0.0:
        raise LoadStateError("already-loaded")
    lp = np.asarray(load_position, dtype=float)
    if np.linalg.norm(state.position - lp) > pickup_radius(scene):
        raise LoadStateError("load outside pickup radius")
    return replace(state, load_mass=float(mass))


def detach_load(scene: SceneConfig, state: ActuatorState) -> ActuatorState:
    if state.load_mass == 0.0:
        raise LoadStateError("not-loaded")
    return replace(state, load_mass=0.0)
