import numpy as np
import pytest

from depthconv.bearing import BaDirection, ba_image, bearing_angle, bearing_angle_field
from depthconv.geometry import (DepthImage, PinholeIntrinsics,
                                depth_to_point_grid, rot90_grid)
from depthconv.synth import render_plane, render_sphere

from conftest import grid_from_points, law_of_cosines_bearing, small_spherical, square_pinhole

ALL_DIRECTIONS = list(BaDirection)


def plane_grid(model, normal=(0, 0, 1), offset=2.0):
    img = render_plane(model, np.asarray(normal, dtype=float), offset)
    return depth_to_point_grid(img, model)


def composite_grid(n=32):
    """Plane plus an off-axis sphere; deliberately not symmetric."""
    intr = PinholeIntrinsics(fx=60, fy=60, cx=(n - 1) / 2, cy=(n - 1) / 2,
                             width=n, height=n)
    plane = render_plane(intr, [0.15, 0.3, 1.0], 3.0)
    sphere = render_sphere(intr, [0.4, -0.3, 2.0], 0.7)
    values = np.where(sphere.valid & (sphere.values < plane.values),
                      sphere.values, plane.values)
    valid = plane.valid | sphere.valid
    img = DepthImage(np.where(valid, values, 0.0), "depth", valid)
    return depth_to_point_grid(img, intr)


class TestBearingAngle:
    def test_right_angle_at_principal_point(self):
        # fronto-parallel plane: at the principal point P = (0, 0, d) and
        # the difference to the left neighbor is purely horizontal
        intr = PinholeIntrinsics(fx=100, fy=100, cx=16, cy=16, width=33, height=33)
        grid = plane_grid(intr)
        beta = bearing_angle(grid, 16, 16, BaDirection.HORIZONTAL)
        assert beta == pytest.approx(np.pi / 2, abs=1e-15)

    def test_collinear_towards_zero(self):
        p = np.array([0.3, -0.2, 2.0])
        pts = np.stack([np.stack([0.999 * p, p]), np.stack([p * 2, p * 3])])
        grid = grid_from_points(pts)
        beta = bearing_angle(grid, 0, 1, BaDirection.HORIZONTAL)
        assert beta == pytest.approx(0.0, abs=1e-6)

    def test_opposed_collinear_towards_pi(self):
        p = np.array([0.3, -0.2, 2.0])
        pts = np.stack([np.stack([1.001 * p, p]), np.stack([p * 2, p * 3])])
        grid = grid_from_points(pts)
        beta = bearing_angle(grid, 0, 1, BaDirection.HORIZONTAL)
        assert beta == pytest.approx(np.pi, abs=1e-6)

    def test_no_value_cases(self):
        pts = np.ones((3, 3, 3))
        valid = np.ones((3, 3), dtype=bool)
        valid[1, 0] = False
        grid = grid_from_points(pts, valid)
        assert bearing_angle(grid, 1, 0, BaDirection.HORIZONTAL) is None  # no predecessor
        assert bearing_angle(grid, 1, 1, BaDirection.HORIZONTAL) is None  # invalid neighbor
        assert bearing_angle(grid, 2, 1, BaDirection.HORIZONTAL) is None  # coincident points
        assert bearing_angle(grid, 0, 1, BaDirection.VERTICAL) is None    # first row

    @pytest.mark.parametrize("direction", ALL_DIRECTIONS)
    def test_matches_law_of_cosines_on_scenes(self, direction):
        scenes = []
        pin = square_pinhole(n=17, f=40.0)
        scenes.append((pin, plane_grid(pin, (0.2, -0.1, 1.0), 2.5)))
        img = render_sphere(pin, [0.1, 0.2, 3.0], 1.1)
        scenes.append((pin, depth_to_point_grid(img, pin)))
        sph = small_spherical(24, 16)
        scenes.append((sph, depth_to_point_grid(render_plane(sph, [1.0, 0.3, -0.2], 2.0), sph)))
        scenes.append((sph, depth_to_point_grid(render_sphere(sph, [2.5, 1.2, -0.4], 0.9), sph)))
        di, dj = direction.value
        for model, grid in scenes:
            beta, ok = bearing_angle_field(grid, direction)
            ref, ref_ok = law_of_cosines_bearing(grid, model, di, dj)
            compare = ok & ref_ok
            assert compare.sum() > 50
            np.testing.assert_allclose(beta[compare], ref[compare], atol=1e-9)

    def test_scalar_agrees_with_field(self, rng):
        grid = composite_grid(16)
        beta, ok = bearing_angle_field(grid, BaDirection.DIAGONAL)
        for i, j in zip(rng.integers(0, 16, 25), rng.integers(0, 16, 25)):
            scalar = bearing_angle(grid, int(i), int(j), BaDirection.DIAGONAL)
            if ok[i, j]:
                assert scalar == pytest.approx(beta[i, j], abs=1e-12)
            else:
                assert scalar is None


class TestBaImage:
    def test_gray_mapping_endpoints(self):
        # dyadic on-axis points make cos(beta) = +/-1 exact in floating point
        a = np.array([0.0, 0.0, 2.0])
        b = np.array([0.0, 0.0, 4.0])
        pts = np.stack([np.stack([a, b, 2 * b]),    # difference parallel: beta = 0
                        np.stack([b, a, b / 4])])   # difference opposed: beta = pi
        grid = grid_from_points(pts)
        img = ba_image(grid, BaDirection.HORIZONTAL)
        assert img.values[0, 1] == 0
        assert img.values[1, 1] == 255

    def test_gray_mapping_near_endpoints(self):
        # almost-collinear real-world values stay one level inside the range
        p = np.array([0.3, -0.2, 2.0])
        q = np.array([-0.1, 0.4, 1.5])
        pts = np.stack([np.stack([0.999 * p, p, 2 * p]),
                        np.stack([1.001 * q, q, 3 * q])])
        grid = grid_from_points(pts)
        img = ba_image(grid, BaDirection.HORIZONTAL)
        assert img.values[0, 1] <= 1
        assert img.values[1, 1] >= 254

    def test_right_angle_maps_to_127(self):
        intr = PinholeIntrinsics(fx=100, fy=100, cx=16, cy=16, width=33, height=33)
        img = ba_image(plane_grid(intr), BaDirection.HORIZONTAL)
        assert img.values[16, 16] == 127    # floor(255 * 0.5)

    @pytest.mark.parametrize("direction", ALL_DIRECTIONS)
    def test_values_in_range_and_borders_invalid(self, direction):
        grid = composite_grid(20)
        img = ba_image(grid, direction)
        assert img.values.max() <= 255
        assert img.values[~img.valid].max(initial=0) == 0
        di, dj = direction.value
        if di == -1:
            assert not img.valid[0, :].any()
        if dj == -1:
            assert not img.valid[:, 0].any()
        if dj == 1:
            assert not img.valid[:, -1].any()

    def test_monotone_along_direction_on_plane(self):
        intr = square_pinhole(n=33, f=97.3)
        img = ba_image(plane_grid(intr, offset=1.37), BaDirection.HORIZONTAL)
        beta, ok = bearing_angle_field(plane_grid(intr, offset=1.37), BaDirection.HORIZONTAL)
        row = beta[16, 1:]
        assert np.all(np.diff(row) < 0)
        assert ok[16, 1:].all()
        # gradient shading shows up as monotone gray levels too
        grays = img.values[16, 1:].astype(int)
        assert np.all(np.diff(grays) <= 0)

    def test_symmetric_about_principal_column_on_plane(self):
        intr = square_pinhole(n=33, f=97.3)
        img = ba_image(plane_grid(intr, offset=1.37), BaDirection.HORIZONTAL)
        c = 16
        for delta in range(1, 15):
            left = int(img.values[10, c - delta])
            right = int(img.values[10, c + delta])
            assert left + right == 254  # beta(-d) = pi - beta(+d)

    def test_rotation_swaps_horizontal_and_vertical(self):
        grid = composite_grid(32)
        rotated = rot90_grid(grid)
        swap = ba_image(rotated, BaDirection.HORIZONTAL)
        ref = ba_image(grid, BaDirection.VERTICAL)
        np.testing.assert_array_equal(swap.values, np.rot90(ref.values))
        np.testing.assert_array_equal(swap.valid, np.rot90(ref.valid))

    def test_not_invariant_under_rotation(self):
        grid = composite_grid(32)
        rotated = rot90_grid(grid)
        img_rot = ba_image(rotated, BaDirection.HORIZONTAL)
        img = ba_image(grid, BaDirection.HORIZONTAL)
        both = img_rot.valid & np.rot90(img.valid)
        assert (img_rot.values[both] != np.rot90(img.values)[both]).mean() > 0.5

    def test_direction_parse(self):
        assert BaDirection.parse("horizontal") is BaDirection.HORIZONTAL
        assert BaDirection.parse("ANTIDIAGONAL") is BaDirection.ANTIDIAGONAL
        with pytest.raises(ValueError):
            BaDirection.parse("sideways")
