import numpy as np
import pytest

from pentabot import stability
from pentabot.magnetics import CoilSpec
from pentabot.scene import SceneConfig, make_2d_scene, preset_scene
from pentabot.stability import (
    RegionMap,
    default_current_grid,
    export_csv,
    find_equilibrium,
    load_region_map,
    region_area,
    save_region_map,
    scan_controllable_region,
)


def random_static_scene(rng):
    """A 2D scene variant with jittered coil placement and constants."""
    base = make_2d_scene(5.11e8, remap_enabled=False)
    coils = []
    for c in base.coils:
        pos = c.position + np.append(rng.uniform(-0.02, 0.02, size=2), 0.0)
        ang = np.deg2rad(rng.uniform(30, 60))
        sx = 1.0 if c.position[0] < 0 else -1.0
        axis = np.array([sx * np.sin(ang), -np.cos(ang), 0.0])
        coils.append(CoilSpec(position=pos, axis=axis,
                              coil_constant=rng.uniform(0.5, 2.0),
                              polarity=c.polarity,
                              current_range=c.current_range))
    return SceneConfig(coils=tuple(coils), actuator=base.actuator,
                       workspace_min=base.workspace_min,
                       workspace_max=base.workspace_max,
                       drag=base.drag, gravity=base.gravity,
                       remap=base.remap, dimensionality=2)


class TestFindEquilibrium:
    def test_symmetric_scene_equilibrium_on_axis(self):
        scene = make_2d_scene(5.11e8, remap_enabled=False)
        currents = [3e8, 3e8]
        report = find_equilibrium(scene, currents, [0.01, 0.05, 0.0])
        assert report.converged
        assert abs(report.point[0]) < 1e-6
        assert report.residual_force < stability.FORCE_TOLERANCE

    def test_converged_equilibria_are_earnshaw_unstable(self):
        rng = np.random.default_rng(7)
        found = 0
        tried = 0
        while found < 10 and tried < 200:
            tried += 1
            scene = random_static_scene(rng)
            currents = rng.uniform(0.3, 1.0, size=2) * 5.11e8
            guess = np.array([rng.uniform(-0.05, 0.05),
                              rng.uniform(-0.02, 0.1), 0.0])
            report = find_equilibrium(scene, currents, guess)
            if not report.converged:
                continue
            found += 1
            assert report.hessian_eigs.min() <= 1e-10
            assert not report.stable_static
        assert found == 10

    def test_zero_currents_no_equilibrium(self):
        scene = preset_scene("2d-paper")
        report = find_equilibrium(scene, [0.0, 0.0], [0.0, 0.0, 0.0])
        assert not report.converged

    def test_guess_outside_workspace_rejected(self):
        scene = preset_scene("2d-paper")
        with pytest.raises(ValueError):
            find_equilibrium(scene, [0.0, 0.0], [1.0, 0.0, 0.0])


def small_grid(scene, steps=11):
    return default_current_grid(scene, steps)


class TestScan:
    def test_zero_grid_empty_region(self):
        scene = make_2d_scene(5.11e8, remap_enabled=False)
        grid = np.zeros((1, 2))
        rm = scan_controllable_region(scene, grid, resolution=0.02)
        assert rm.grid.sum() == 0
        assert region_area(rm) == 0.0

    def test_paper_scene_nonempty_below_coils(self):
        scene = make_2d_scene(5.11e8, remap_enabled=False)
        rm = scan_controllable_region(scene, small_grid(scene),
                                      resolution=0.01)
        centers = rm.controllable_centers()
        assert len(centers) > 0
        coil_y = scene.coils[0].position[1]
        assert np.all(centers[:, 1] < coil_y)

    def test_opposing_polarity_region_larger(self):
        opposing = make_2d_scene(5.11e8, same_polarity=False)
        same = make_2d_scene(5.11e8, same_polarity=True)
        a_opp = region_area(scan_controllable_region(
            opposing, small_grid(opposing), resolution=0.01))
        a_same = region_area(scan_controllable_region(
            same, small_grid(same), resolution=0.01))
        assert a_opp >= a_same

    def test_monotone_in_current_grid(self):
        scene = make_2d_scene(5.11e8)
        small = default_current_grid(scene, 5)
        big = np.vstack([small, default_current_grid(scene, 9)])
        a_small = region_area(scan_controllable_region(scene, small,
                                                       resolution=0.015))
        a_big = region_area(scan_controllable_region(scene, big,
                                                     resolution=0.015))
        assert a_big >= a_small

    def test_determinism(self):
        scene = make_2d_scene(5.11e8)
        g = small_grid(scene, 7)
        a = scan_controllable_region(scene, g, resolution=0.02)
        b = scan_controllable_region(scene, g, resolution=0.02)
        np.testing.assert_array_equal(a.grid, b.grid)

    def test_resolution_refinement_stable(self):
        scene = make_2d_scene(5.11e8)
        g = small_grid(scene, 11)
        coarse = region_area(scan_controllable_region(scene, g,
                                                      resolution=0.02))
        fine = region_area(scan_controllable_region(scene, g,
                                                    resolution=0.01))
        assert abs(fine - coarse) / coarse < 0.15

    def test_bad_inputs(self):
        scene = make_2d_scene(5.11e8)
        with pytest.raises(ValueError):
            scan_controllable_region(scene, np.zeros((0, 2)), resolution=0.01)
        with pytest.raises(ValueError):
            scan_controllable_region(scene, small_grid(scene), resolution=0.0)
        with pytest.raises(ValueError):
            scan_controllable_region(scene, small_grid(scene),
                                     domain=([0.1, 0.1], [0.0, 0.0]),
                                     resolution=0.01)


class TestRegionArea:
    def test_full_map_arithmetic(self):
        rm = RegionMap(origin=np.array([-0.15, -0.15]), resolution=0.005,
                       grid=np.ones((60, 60), dtype=bool), scene_hash="x",
                       current_grid_shape=(1, 2), dimensionality=2)
        assert region_area(rm) == pytest.approx(0.09)

    def test_empty_map(self):
        rm = RegionMap(origin=np.array([-0.15, -0.15]), resolution=0.005,
                       grid=np.zeros((60, 60), dtype=bool), scene_hash="x",
                       current_grid_shape=(1, 2), dimensionality=2)
        assert region_area(rm) == 0.0


class TestSerialization:
    def test_round_trip(self, tmp_path):
        scene = make_2d_scene(5.11e8)
        rm = scan_controllable_region(scene, small_grid(scene, 7),
                                      resolution=0.02)
        path = tmp_path / "region.map"
        save_region_map(rm, path)
        back = load_region_map(path)
        np.testing.assert_array_equal(back.grid, rm.grid)
        np.testing.assert_array_equal(back.origin, rm.origin)
        assert back.resolution == rm.resolution
        assert back.scene_hash == rm.scene_hash
        assert back.current_grid_shape == rm.current_grid_shape

    def test_csv_export(self, tmp_path):
        scene = make_2d_scene(5.11e8)
        rm = scan_controllable_region(scene, small_grid(scene, 7),
                                      resolution=0.02)
        path = tmp_path / "cells.csv"
        export_csv(rm, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "x,y"
        assert len(lines) - 1 == int(rm.grid.sum())
