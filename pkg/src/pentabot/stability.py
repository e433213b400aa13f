"""Force-balance equilibria, Earnshaw instability checks, and
controllable-region scans over per-coil current grids.

All analysis here uses the raw (unshaped) physical forces: the scan asks
where gravity can be balanced by some admissible current vector, and the
Hessian check asks whether such a balance could ever be statically stable
(it cannot, in a static field).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from . import magnetics
from .magnetics import COIL_EXCLUSION_RADIUS
from .scene import SceneConfig

FORCE_TOLERANCE = 1e-8       # N, equilibrium convergence
HESSIAN_FD_STEP = 1e-4       # m
MAX_SOLVER_ITERATIONS = 200

#: Force-balance tolerance for the region scan, as a fraction of M*g.
SCAN_TOLERANCE_FRACTION = 0.05
DEFAULT_CURRENT_STEPS = 21


@dataclass(frozen=True)
class EquilibriumReport:
    point: np.ndarray
    residual_force: float          # N
    hessian_eigs: np.ndarray       # J/m^2, ascending
    stable_static: bool
    converged: bool


@dataclass(frozen=True)
class RegionMap:
    origin: np.ndarray             # m, domain minimum corner (active axes)
    resolution: float              # m
    grid: np.ndarray               # bool, shape (n_axis0, n_axis1[, n_axis2])
    scene_hash: str
    current_grid_shape: tuple      # (n_combos, n_coils)
    dimensionality: int

    def __post_init__(self):
        if self.resolution <= 0.0:
            raise ValueError("resolution must be positive")

    @property
    def cell_centers(self) -> np.ndarray:
        idx = np.argwhere(np.ones(self.grid.shape, dtype=bool))
        return self.origin + (idx + 0.5) * self.resolution

    def controllable_centers(self) -> np.ndarray:
        idx = np.argwhere(self.grid)
        return self.origin + (idx + 0.5) * self.resolution


def _total_force(scene: SceneConfig, currents, p) -> np.ndarray:
    Fm = magnetics.actuator_force(scene, currents, p)
    return Fm + scene.actuator.mass * scene.gravity


def total_potential(scene: SceneConfig, currents, p) -> float:
    """U(p) - M g . p: magnetic plus gravitational potential energy."""
    U = magnetics.actuator_energy(scene, currents, p)
    return U - scene.actuator.mass * float(np.dot(scene.gravity, p))


def potential_hessian(scene: SceneConfig, currents, p,
                      h: float = HESSIAN_FD_STEP) -> np.ndarray:
    """Central-FD Hessian of the total potential (gravity drops out)."""
    p = np.asarray(p, dtype=float)
    H = np.empty((3, 3))
    f0 = total_potential(scene, currents, p)
    e = np.eye(3) * h
    for i in range(3):
        H[i, i] = (total_potential(scene, currents, p + e[i])
                   - 2.0 * f0
                   + total_potential(scene, currents, p - e[i])) / h**2
    for i in range(3):
        for j in range(i + 1, 3):
            fpp = total_potential(scene, currents, p + e[i] + e[j])
            fpm = total_potential(scene, currents, p + e[i] - e[j])
            fmp = total_potential(scene, currents, p - e[i] + e[j])
            fmm = total_potential(scene, currents, p - e[i] - e[j])
            H[i, j] = H[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h**2)
    return H


def find_equilibrium(scene: SceneConfig, currents, initial_guess) -> EquilibriumReport:
    """Solve for a force-balance point near ``initial_guess``.

    Damped least-squares descent on |F_total|^2; non-convergence within the
    iteration budget yields a report with ``converged=False``.
    """
    guess = np.asarray(initial_guess, dtype=float)
    if not scene.in_workspace(guess):
        raise ValueError("initial guess outside workspace")
    active = scene.active_axes
    base = guess.copy()

    def residual(q):
        p = base.copy()
        p[active] = q
        try:
            return _total_force(scene, currents, p)
        except magnetics.FieldDomainError:
            return np.full(3, 1.0)

    lo = scene.workspace_min[active]
    hi = scene.workspace_max[active]
    sol = least_squares(residual, guess[active], bounds=(lo, hi),
                        method="trf", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                        max_nfev=MAX_SOLVER_ITERATIONS * (len(active) + 1))
    point = base.copy()
    point[active] = sol.x
    try:
        res = float(np.linalg.norm(_total_force(scene, currents, point)))
    except magnetics.FieldDomainError:
        res = np.inf
    converged = res < FORCE_TOLERANCE
    if converged:
        H = potential_hessian(scene, currents, point)
        eigs = np.linalg.eigvalsh(H)
    else:
        eigs = np.full(3, np.nan)
    stable = converged and bool(np.all(eigs > 0.0))
    return EquilibriumReport(point=point, residual_force=res,
                             hessian_eigs=eigs, stable_static=stable,
                             converged=converged)


def default_current_grid(scene: SceneConfig,
                         steps: int = DEFAULT_CURRENT_STEPS) -> np.ndarray:
    """Cartesian product of ``steps`` evenly spaced currents per coil."""
    axes = [np.linspace(c.current_range[0], c.current_range[1], steps)
            for c in scene.coils]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def balance_residual(forces: np.ndarray, needed: np.ndarray) -> np.ndarray:
    """Best |lambda*F - needed| over the continuous scale lambda in [0, 1].

    The soft-dipole force is 1-homogeneous in the currents, so every grid
    vector spans a ray of reachable forces; optimizing the scale along each
    ray in closed form avoids the (hopeless) magnitude quantization of a
    purely discrete current grid.
    """
    f2 = np.einsum("...i,...i->...", forces, forces)
    ft = forces @ needed
    lam = np.zeros_like(f2)
    nz = f2 > 0
    lam[nz] = np.clip(ft[nz] / f2[nz], 0.0, 1.0)
    diff = lam[..., None] * forces - needed
    return np.linalg.norm(diff, axis=-1)


def scan_controllable_region(scene: SceneConfig, current_grid,
                             domain: tuple | None = None,
                             resolution: float = 0.005) -> RegionMap:
    """Mark every cell whose centre can be force-balanced (residual below
    5% of M*g) by scaling some current vector of ``current_grid``."""
    if resolution <= 0.0:
        raise ValueError("resolution must be positive")
    combos = np.asarray(current_grid, dtype=float)
    if combos.ndim != 2 or combos.shape[0] == 0:
        raise ValueError("current_grid must be a non-empty (n, n_coils) array")
    active = scene.active_axes
    if domain is None:
        lo = scene.workspace_min[active]
        hi = scene.workspace_max[active]
    else:
        lo = np.asarray(domain[0], dtype=float)[: len(active)]
        hi = np.asarray(domain[1], dtype=float)[: len(active)]
    if np.any(hi <= lo):
        raise ValueError("empty scan domain")

    shape = tuple(int(np.ceil((h - l) / resolution)) for l, h in zip(lo, hi))
    idx = np.indices(shape).reshape(len(shape), -1).T
    centers_active = lo + (idx + 0.5) * resolution
    centers = np.zeros((centers_active.shape[0], 3))
    centers[:, active] = centers_active

    n_cells = centers.shape[0]
    n_coils = len(scene.coils)
    Bu = np.empty((n_cells, n_coils, 3))
    Ju = np.empty((n_cells, n_coils, 3, 3))
    valid = np.ones(n_cells, dtype=bool)
    for ci, coil in enumerate(scene.coils):
        d = np.linalg.norm(centers - coil.position, axis=1)
        valid &= d >= COIL_EXCLUSION_RADIUS
    for ci, coil in enumerate(scene.coils):
        m = coil.moment(1.0)
        for j in np.nonzero(valid)[0]:
            Bu[j, ci] = magnetics.dipole_field(m, coil.position, centers[j])
            Ju[j, ci] = magnetics.dipole_field_jacobian(m, coil.position, centers[j])

    k = scene.actuator.dipole_strength
    needed = -scene.actuator.mass * scene.gravity
    tol = SCAN_TOLERANCE_FRACTION * scene.actuator.mass * magnetics.GRAVITY
    sub = np.nonzero(valid)[0]
    best_sub = np.full(len(sub), np.inf)
    Bs, Js = Bu[sub], Ju[sub]
    chunk = max(1, int(2e7 // max(1, 9 * len(sub))))
    for start in range(0, combos.shape[0], chunk):
        I = combos[start:start + chunk]
        B = np.einsum("mc,nci->mni", I, Bs)
        J = np.einsum("mc,ncij->mnij", I, Js)
        nB = np.linalg.norm(B, axis=2)
        F = k * np.einsum("mnij,mnj->mni", J, B)
        nz = nB > 0
        F[nz] /= nB[nz, None]
        F[~nz] = 0.0
        resid = balance_residual(F, needed)
        best_sub = np.minimum(best_sub, resid.min(axis=0))

    grid = np.zeros(n_cells, dtype=bool)
    grid[sub] = best_sub < tol
    return RegionMap(origin=lo, resolution=resolution,
                     grid=grid.reshape(shape),
                     scene_hash=scene.scene_hash(),
                     current_grid_shape=combos.shape,
                     dimensionality=scene.dimensionality)


def region_area(region: RegionMap) -> float:
    """Controllable measure: cell count times cell area (2D) or volume (3D)."""
    d = region.grid.ndim
    return float(region.grid.sum()) * region.resolution**d


def save_region_map(region: RegionMap, path) -> None:
    """Portable text format: header lines then row-major 0/1 cells."""
    with open(path, "w") as f:
        f.write("pentabot-region-map 1\n")
        f.write(f"scene_hash {region.scene_hash}\n")
        f.write(f"dimensionality {region.dimensionality}\n")
        f.write("origin " + " ".join(repr(float(x)) for x in region.origin) + "\n")
        f.write(f"resolution {float(region.resolution)!r}\n")
        f.write("shape " + " ".join(str(n) for n in region.grid.shape) + "\n")
        f.write("current_grid_shape "
                + " ".join(str(n) for n in region.current_grid_shape) + "\n")
        flat = region.grid.reshape(region.grid.shape[0], -1)
        for row in flat:
            f.write("".join("1" if v else "0" for v in row) + "\n")


def load_region_map(path) -> RegionMap:
    with open(path) as f:
        magic = f.readline().split()
        if magic[:1] != ["pentabot-region-map"]:
            raise ValueError("not a region map file")
        header = {}
        for _ in range(6):
            key, *vals = f.readline().split()
            header[key] = vals
        shape = tuple(int(n) for n in header["shape"])
        rows = [f.readline().strip() for _ in range(shape[0])]
    flat = np.array([[ch == "1" for ch in row] for row in rows], dtype=bool)
    return RegionMap(
        origin=np.array([float(x) for x in header["origin"]]),
        resolution=float(header["resolution"][0]),
        grid=flat.reshape(shape),
        scene_hash=header["scene_hash"][0],
        current_grid_shape=tuple(int(n) for n in header["current_grid_shape"]),
        dimensionality=int(header["dimensionality"][0]),
    )


def export_csv(region: RegionMap, path) -> None:
    """CSV of controllable cell centres, for plotting."""
    centers = region.controllable_centers()
    cols = "xyz"[: centers.shape[1]]
    with open(path, "w") as f:
        f.write(",".join(cols) + "\n")
        for row in centers:
            f.write(",".join(repr(float(v)) for v in row) + "\n")
