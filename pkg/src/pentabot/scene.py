"""Scene descriptions and the two built-in electromagnet layouts.

``2d-paper``: two coils 0.15 m apart hanging above the workspace, axes
tilted 45 degrees downward toward each other, opposing polarity.
``3d-paper``: a central vertical coil surrounded by four ring coils at
60 degrees elevation, centre polarity reversed.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .magnetics import ActuatorSpec, CoilSpec, GRAVITY


@dataclass(frozen=True)
class RemapConfig:
    """Distance-based force shaping: each coil's force contribution is
    scaled by min((d_m/d_ref)^2, 1)."""

    enabled: bool = True
    reference_distance: float = 1.0  # m, normalizes distance-to-coil

    def __post_init__(self):
        if self.reference_distance <= 0.0:
            raise ValueError("reference_distance must be positive")


@dataclass(frozen=True)
class SceneConfig:
    coils: tuple[CoilSpec, ...]
    actuator: ActuatorSpec
    workspace_min: np.ndarray
    workspace_max: np.ndarray
    drag: float                 # kg/s, linear velocity drag
    gravity: np.ndarray         # m/s^2 vector
    remap: RemapConfig
    dimensionality: int         # 2 or 3
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "coils", tuple(self.coils))
        object.__setattr__(self, "workspace_min",
                           np.asarray(self.workspace_min, dtype=float))
        object.__setattr__(self, "workspace_max",
                           np.asarray(self.workspace_max, dtype=float))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float))
        if self.dimensionality not in (2, 3):
            raise ValueError("dimensionality must be 2 or 3")
        if self.drag < 0.0:
            raise ValueError("drag must be nonnegative")
        active = self.active_axes
        ext = self.workspace_max - self.workspace_min
        if np.any(ext[active] <= 0.0):
            raise ValueError("workspace must be non-degenerate in active axes")

    @property
    def active_axes(self) -> np.ndarray:
        """Indices of the motion axes (x,y for 2D; x,y,z for 3D)."""
        return np.arange(self.dimensionality)

    @property
    def workspace_extent(self) -> np.ndarray:
        return self.workspace_max - self.workspace_min

    @property
    def workspace_center(self) -> np.ndarray:
        return 0.5 * (self.workspace_min + self.workspace_max)

    @property
    def workspace_diagonal(self) -> float:
        ext = self.workspace_extent[self.active_axes]
        return float(np.linalg.norm(ext))

    def in_workspace(self, position) -> bool:
        p = np.asarray(position, dtype=float)
        a = self.active_axes
        return bool(np.all(p[a] >= self.workspace_min[a])
                    and np.all(p[a] <= self.workspace_max[a]))

    def scene_hash(self) -> str:
        doc = {
            "coils": [
                {
                    "position": [repr(float(x)) for x in c.position],
                    "axis": [repr(float(x)) for x in c.axis],
                    "coil_constant": repr(c.coil_constant),
                    "polarity": c.polarity,
                    "current_range": [repr(c.current_range[0]),
                                      repr(c.current_range[1])],
                }
                for c in self.coils
            ],
            "actuator": {
                "mass": repr(self.actuator.mass),
                "dipole_strength": repr(self.actuator.dipole_strength),
                "radius": repr(self.actuator.radius),
            },
            "workspace_min": [repr(float(x)) for x in self.workspace_min],
            "workspace_max": [repr(float(x)) for x in self.workspace_max],
            "drag": repr(self.drag),
            "gravity": [repr(float(x)) for x in self.gravity],
            "remap": [self.remap.enabled, repr(self.remap.reference_distance)],
            "dimensionality": self.dimensionality,
        }
        blob = json.dumps(doc, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


# Current limits calibrated once (build-time oracle, see
# tools/calibrate_current.py): the smallest I_max, to 3 significant
# figures, such that the shaped coil forces can statically support the
# bare actuator at the workspace centre.
I_MAX_2D = 5.11e8  # A
I_MAX_3D = 2.52e8  # A

COIL_SEPARATION_2D = 0.15  # m
PAPER_ACTUATOR = ActuatorSpec(mass=0.8e-3, dipole_strength=1.3e-7, radius=5e-3)

_WS_MIN = np.array([-0.15, -0.15, -0.15])
_WS_MAX = np.array([0.15, 0.15, 0.15])

#: Linear drag chosen so free-fall terminal speed is about 0.2 m/s
#: (oil-filled box emulation): b = M g / v_term.
DEFAULT_DRAG = 0.039  # kg/s


def _coil_2d(x: float, tilt_sign: float, polarity: int, i_max: float) -> CoilSpec:
    s = np.sqrt(0.5)
    return CoilSpec(
        position=np.array([x, 0.15, 0.0]),
        axis=np.array([tilt_sign * s, -s, 0.0]),
        coil_constant=1.0,
        polarity=polarity,
        current_range=(0.0, i_max),
    )


def make_2d_scene(i_max: float, same_polarity: bool = False,
                  remap_enabled: bool = True, drag: float = DEFAULT_DRAG,
                  name: str = "2d-paper") -> SceneConfig:
    half = COIL_SEPARATION_2D / 2.0
    left = _coil_2d(-half, +1.0, 1, i_max)
    right = _coil_2d(+half, -1.0, 1 if same_polarity else -1, i_max)
    ws_diag = float(np.hypot(0.3, 0.3))
    return SceneConfig(
        coils=(left, right),
        actuator=PAPER_ACTUATOR,
        workspace_min=_WS_MIN,
        workspace_max=_WS_MAX,
        drag=drag,
        gravity=np.array([0.0, -GRAVITY, 0.0]),
        remap=RemapConfig(enabled=remap_enabled, reference_distance=ws_diag),
        dimensionality=2,
        name=name,
    )


def make_3d_scene(i_max: float, remap_enabled: bool = True,
                  drag: float = DEFAULT_DRAG, name: str = "3d-paper") -> SceneConfig:
    coils = [
        CoilSpec(
            position=np.array([0.0, 0.0, 0.15]),
            axis=np.array([0.0, 0.0, -1.0]),
            coil_constant=1.0,
            polarity=-1,
            current_range=(0.0, i_max),
        )
    ]
    ring_r = COIL_SEPARATION_2D / 2.0
    elev = np.deg2rad(60.0)
    for ang in (0.0, 90.0, 180.0, 270.0):
        a = np.deg2rad(ang)
        pos = np.array([ring_r * np.cos(a), ring_r * np.sin(a), 0.15])
        axis = np.array([-np.cos(elev) * np.cos(a),
                         -np.cos(elev) * np.sin(a),
                         -np.sin(elev)])
        coils.append(CoilSpec(position=pos, axis=axis, coil_constant=1.0,
                              polarity=1, current_range=(0.0, i_max)))
    ws_diag = float(np.linalg.norm([0.3, 0.3, 0.3]))
    return SceneConfig(
        coils=tuple(coils),
        actuator=PAPER_ACTUATOR,
        workspace_min=_WS_MIN,
        workspace_max=_WS_MAX,
        drag=drag,
        gravity=np.array([0.0, 0.0, -GRAVITY]),
        remap=RemapConfig(enabled=remap_enabled, reference_distance=ws_diag),
        dimensionality=3,
        name=name,
    )


def preset_scene(name: str, **overrides) -> SceneConfig:
    """Built-in scenes: ``2d-paper`` or ``3d-paper``."""
    if name == "2d-paper":
        return make_2d_scene(I_MAX_2D, name=name, **overrides)
    if name == "3d-paper":
        return make_3d_scene(I_MAX_3D, name=name, **overrides)
    raise ValueError(f"unknown scene preset {name!r}")
