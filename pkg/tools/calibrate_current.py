"""Build-time oracle: find the smallest per-coil current limit (3 sig figs)
that lets the shaped coil forces statically support the bare actuator at the
workspace centre.  The resulting values are frozen into scene.py."""

import numpy as np

from pentabot import magnetics
from pentabot.scene import make_2d_scene, make_3d_scene
from pentabot.simulator import magnetic_force


def support_exists(scene, i_max, n_grid=21, tol_frac=0.05):
    center = scene.workspace_center
    n = len(scene.coils)
    # unit-current per-coil field/jacobian at the centre
    Bu = np.empty((n, 3))
    Ju = np.empty((n, 3, 3))
    for i, c in enumerate(scene.coils):
        m = c.moment(1.0)
        Bu[i] = magnetics.dipole_field(m, c.position, center)
        Ju[i] = magnetics.dipole_field_jacobian(m, c.position, center)
    d_ref = scene.remap.reference_distance
    w = np.array([min((np.linalg.norm(center - c.position) / d_ref) ** 2, 1.0)
                  for c in scene.coils])
    vals = np.linspace(0.0, i_max, n_grid)
    grids = np.meshgrid(*([vals] * n), indexing="ij")
    I = np.stack([g.ravel() for g in grids], axis=1)  # (m, n)
    B = I @ Bu                       # (m, 3)
    nB = np.linalg.norm(B, axis=1)
    ok = nB > 0
    k = scene.actuator.dipole_strength
    # shaped force: sum_i w_i * k * (I_i J_i) B / |B|
    Jw = np.einsum("c,cij->cij", w, Ju)
    Jtot = np.einsum("mc,cij->mij", I, Jw)
    F = k * np.einsum("mij,mj->mi", Jtot, B)
    F[ok] /= nB[ok, None]
    F[~ok] = 0.0
    from pentabot.stability import balance_residual
    resid = balance_residual(F, -scene.actuator.mass * scene.gravity)
    tol = tol_frac * scene.actuator.mass * 9.81
    return bool(np.any(resid < tol))


def calibrate(make_scene, n_grid):
    lo, hi = 1.0, 1.0
    while not support_exists(make_scene(hi), hi, n_grid):
        hi *= 2.0
        if hi > 1e15:
            raise RuntimeError("no support found")
    lo = hi / 2.0
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if support_exists(make_scene(mid), mid, n_grid):
            hi = mid
        else:
            lo = mid
    # round up to 3 significant figures
    from math import ceil, floor, log10
    exp = floor(log10(hi))
    val = ceil(hi / 10 ** (exp - 2)) * 10 ** (exp - 2)
    return val


if __name__ == "__main__":
    i2d = calibrate(lambda i: make_2d_scene(i), n_grid=41)
    print("I_MAX_2D =", i2d)
    i3d = calibrate(lambda i: make_3d_scene(i), n_grid=9)
    print("I_MAX_3D =", i3d)
