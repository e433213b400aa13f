"""Point-dipole magnetic fields, superposition, and forces on a soft dipole.

Every coil is modelled as a point dipole at its centre with moment
``polarity * coil_constant * current * axis``.  The levitated ball is a
soft dipole: it always aligns with the local field, so its energy is
``U = -k * |B|`` and the force on it is ``F = k * grad|B|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MU0_OVER_4PI = 1e-7  # T*m/A, exact by convention here

#: Probes closer than this to a coil centre are rejected (dipole singularity).
COIL_EXCLUSION_RADIUS = 0.01  # m

GRAVITY = 9.81  # m/s^2


class FieldDomainError(ValueError):
    """Probe point is inside a coil's exclusion radius (or on a source)."""


class CurrentRangeError(ValueError):
    """A commanded current lies outside the coil's admissible range."""


def _as_vec3(v) -> np.ndarray:
    a = np.asarray(v, dtype=float)
    if a.shape != (3,):
        raise ValueError(f"expected a 3-vector, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("vector components must be finite")
    return a


@dataclass(frozen=True)
class CoilSpec:
    """One electromagnet: position, axis, moment-per-amp and drive limits."""

    position: np.ndarray
    axis: np.ndarray
    coil_constant: float = 1.0     # A*m^2 per A of drive current
    polarity: int = 1              # +1 or -1
    current_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        object.__setattr__(self, "position", _as_vec3(self.position))
        ax = _as_vec3(self.axis)
        n = np.linalg.norm(ax)
        if abs(n - 1.0) > 1e-9:
            if n == 0.0:
                raise ValueError("coil axis must be nonzero")
            ax = ax / n
        object.__setattr__(self, "axis", ax)
        if self.polarity not in (-1, 1):
            raise ValueError("polarity must be +1 or -1")
        if self.coil_constant <= 0.0:
            raise ValueError("coil_constant must be positive")
        lo, hi = self.current_range
        if lo > hi:
            raise ValueError("current_range must satisfy I_min <= I_max")

    def moment(self, current: float) -> np.ndarray:
        return self.polarity * self.coil_constant * current * self.axis


@dataclass(frozen=True)
class ActuatorSpec:
    """The levitated magnetized ball."""

    mass: float = 0.8e-3           # kg
    dipole_strength: float = 1.3e-7  # paper's empirical k (quoted units)
    radius: float = 5e-3           # m, pickup/collision only

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("mass must be positive")
        if self.dipole_strength <= 0.0:
            raise ValueError("dipole_strength must be positive")


@dataclass(frozen=True)
class FieldSample:
    B: np.ndarray   # T
    U: float        # J
    F: np.ndarray   # N


def dipole_field(moment, source, probe) -> np.ndarray:
    """Field of a point dipole ``moment`` at ``source``, evaluated at ``probe``.

    B = mu0/(4 pi) * (3 (m.rhat) rhat - m) / r^3
    """
    m = _as_vec3(moment)
    r = _as_vec3(probe) - _as_vec3(source)
    d = np.linalg.norm(r)
    if d <= 1e-6:
        raise FieldDomainError("probe coincides with dipole source")
    n = r / d
    return MU0_OVER_4PI * (3.0 * np.dot(m, n) * n - m) / d**3


def dipole_field_jacobian(moment, source, probe) -> np.ndarray:
    """Spatial Jacobian dB_i/dx_k of a point-dipole field (symmetric)."""
    m = _as_vec3(moment)
    r = _as_vec3(probe) - _as_vec3(source)
    d = np.linalg.norm(r)
    if d <= 1e-6:
        raise FieldDomainError("probe coincides with dipole source")
    mr = np.dot(m, r)
    eye = np.eye(3)
    J = (3.0 * (np.outer(r, m) + np.outer(m, r) + mr * eye) / d**5
         - 15.0 * mr * np.outer(r, r) / d**7)
    return MU0_OVER_4PI * J


def check_currents(coils, currents) -> np.ndarray:
    currents = np.asarray(currents, dtype=float)
    if currents.shape != (len(coils),):
        raise ValueError(f"expected {len(coils)} currents, got {currents.shape}")
    for c, i in zip(coils, currents):
        lo, hi = c.current_range
        if not (lo - 1e-12 <= i <= hi + 1e-12):
            raise CurrentRangeError(f"current {i} A outside range [{lo}, {hi}] A")
    return currents


def check_probe(coils, probe) -> np.ndarray:
    p = _as_vec3(probe)
    for c in coils:
        if np.linalg.norm(p - c.position) < COIL_EXCLUSION_RADIUS:
            raise FieldDomainError("probe inside coil exclusion radius")
    return p


def coil_fields(coils, currents, probe):
    """Per-coil field and Jacobian at ``probe``.

    Returns ``(B, J)`` with shapes ``(n, 3)`` and ``(n, 3, 3)``; summing over
    the first axis gives the total field / Jacobian.
    """
    currents = check_currents(coils, currents)
    p = check_probe(coils, probe)
    n = len(coils)
    B = np.empty((n, 3))
    J = np.empty((n, 3, 3))
    for idx, (c, i) in enumerate(zip(coils, currents)):
        m = c.moment(i)
        B[idx] = dipole_field(m, c.position, p)
        J[idx] = dipole_field_jacobian(m, c.position, p)
    return B, J


def total_field(scene, currents, probe) -> np.ndarray:
    """Superposed field of all coils in the scene."""
    B, _ = coil_fields(scene.coils, currents, probe)
    return B.sum(axis=0)


def actuator_energy(scene, currents, probe) -> float:
    """Soft-dipole energy U = -k |B| at the probe point."""
    B = total_field(scene, currents, probe)
    return -scene.actuator.dipole_strength * float(np.linalg.norm(B))


def actuator_force(scene, currents, probe, method: str = "analytic",
                   h: float = 1e-4) -> np.ndarray:
    """Magnetic force on the soft dipole, F = -grad U (gravity excluded).

    ``method`` selects the analytic gradient or central finite differences
    with step ``h``.
    """
    if method == "analytic":
        B, J = coil_fields(scene.coils, currents, probe)
        Btot = B.sum(axis=0)
        Jtot = J.sum(axis=0)
        nB = np.linalg.norm(Btot)
        if nB == 0.0:
            return np.zeros(3)
        # grad|B| = J^T B / |B|; J is symmetric for dipole superpositions
        return scene.actuator.dipole_strength * (Jtot @ Btot) / nB
    if method == "finite_difference":
        if h <= 0.0:
            raise ValueError("finite-difference step h must be positive")
        p = check_probe(scene.coils, probe)
        F = np.zeros(3)
        for k in range(3):
            dp = np.zeros(3)
            dp[k] = h
            up = actuator_energy(scene, currents, p + dp)
            dn = actuator_energy(scene, currents, p - dp)
            F[k] = -(up - dn) / (2.0 * h)
        return F
    raise ValueError(f"unknown force method {method!r}")


def field_sample(scene, currents, probe) -> FieldSample:
    B = total_field(scene, currents, probe)
    U = -scene.actuator.dipole_strength * float(np.linalg.norm(B))
    F = actuator_force(scene, currents, probe)
    return FieldSample(B=B, U=U, F=F)
