"""Shared fixtures and independent reference implementations.

The reference functions here deliberately re-derive results along
different routes than the library (law of cosines instead of vector
angles, gather-and-sort instead of selection filters) so that agreement
is meaningful.
"""

import numpy as np
import pytest

from depthconv.geometry import (PinholeIntrinsics, PointGrid,
                                SphericalIntrinsics, ray_directions)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def square_pinhole(n=33, f=97.3):
    """Square camera with fx = fy and the principal point at the center pixel."""
    c = (n - 1) / 2.0
    return PinholeIntrinsics(fx=f, fy=f, cx=c, cy=c, width=n, height=n)


def small_spherical(width=64, height=32):
    """Forward-looking spherical sector away from the poles."""
    return SphericalIntrinsics(azimuth_min=0.0, azimuth_max=1.2,
                               polar_min=0.9, polar_max=2.1,
                               width=width, height=height)


def grid_from_points(points, valid=None):
    points = np.asarray(points, dtype=np.float64)
    if valid is None:
        valid = np.ones(points.shape[:2], dtype=bool)
    return PointGrid(points, valid)


def sort_median_reference(values, valid, window_w, window_h):
    """Naive masked lower-median: gather every clipped window and sort it.

    Returns the filtered values (0 where the input pixel is invalid).
    """
    h, w = values.shape
    rw, rh = window_w // 2, window_h // 2
    padded = np.full((h + 2 * rh, w + 2 * rw), np.nan)
    padded[rh:rh + h, rw:rw + w] = np.where(valid, values, np.nan)
    offs_i = np.arange(window_h).reshape(window_h, 1)
    offs_j = np.arange(window_w).reshape(1, window_w)
    out = np.zeros_like(values)
    ii, jj = np.nonzero(valid)
    windows = padded[ii[:, None, None] + offs_i[None],
                     jj[:, None, None] + offs_j[None]].reshape(len(ii), -1)
    windows = np.sort(windows, axis=1)
    counts = np.count_nonzero(~np.isnan(windows), axis=1)
    out[ii, jj] = windows[np.arange(len(ii)), (counts - 1) // 2]
    return out


def law_of_cosines_bearing(grid, model, di, dj):
    """Bearing angles recomputed from triangle side lengths.

    Uses the radial distances of the point and its predecessor plus the
    angle between their pixel rays (taken from the sensor model, not the
    points), then solves the triangle at the point's vertex:

        c^2 = r1^2 + r2^2 - 2 r1 r2 cos(step)
        beta = arccos((r1^2 + c^2 - r2^2) / (2 r1 c))

    Returns (beta, defined_mask); entries without a valid predecessor are
    NaN.
    """
    h, w = grid.height, grid.width
    dirs = ray_directions(model)
    dirs = dirs / np.linalg.norm(dirs, axis=-1, keepdims=True)
    r = np.linalg.norm(grid.points, axis=-1)

    beta = np.full((h, w), np.nan)
    ok = np.zeros((h, w), dtype=bool)
    for i in range(h):
        pi = i + di
        if not 0 <= pi < h:
            continue
        for j in range(w):
            pj = j + dj
            if not 0 <= pj < w:
                continue
            if not (grid.valid[i, j] and grid.valid[pi, pj]):
                continue
            r1, r2 = r[i, j], r[pi, pj]
            step = np.arccos(np.clip(dirs[i, j] @ dirs[pi, pj], -1.0, 1.0))
            c_sq = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * np.cos(step)
            if c_sq <= 0:
                continue
            c = np.sqrt(c_sq)
            cos_beta = (r1 * r1 + c_sq - r2 * r2) / (2.0 * r1 * c)
            beta[i, j] = np.arccos(np.clip(cos_beta, -1.0, 1.0))
            ok[i, j] = True
    return beta, ok


def rotvec_to_matrix(v):
    """Rodrigues formula; reference for rigid-alignment tests."""
    v = np.asarray(v, dtype=np.float64)
    angle = np.linalg.norm(v)
    if angle == 0:
        return np.eye(3)
    k = v / angle
    kx = np.array([[0, -k[2], k[1]], [k[2], 0, -k[0]], [-k[1], k[0], 0]])
    return np.eye(3) + np.sin(angle) * kx + (1 - np.cos(angle)) * (kx @ kx)
