"""Bearing-angle images.

Each pixel gets the angle between the ray from the sensor center to its
point P and the segment from a designated neighbor point to P:

    beta = arccos( P . (P - P_prev) / (|P| |P - P_prev|) )

The neighbor lies in one of four grid directions; the predecessor
convention (left / above / top-left / top-right) makes the value depend
on the scan direction, which is why these images are not rotation
invariant. beta lives in (0, pi) and is quantized to gray as
g = floor((2**bits - 1) * beta / pi).
"""

import enum

import numpy as np

from .images import quantize_unit


class BaDirection(enum.Enum):
    """Neighbor direction; the value is the (row, column) predecessor offset."""

    HORIZONTAL = (0, -1)
    VERTICAL = (-1, 0)
    DIAGONAL = (-1, -1)      # top-left to bottom-right
    ANTIDIAGONAL = (-1, 1)   # top-right to bottom-left

    @classmethod
    def parse(cls, name):
        try:
            return cls[name.upper()]
        except KeyError:
            raise ValueError(f"unknown bearing direction {name!r}") from None


def bearing_angle(grid, i, j, direction):
    """Bearing angle in radians at pixel (i, j), or None when undefined.

    Undefined cases: the predecessor lies outside the grid, either point
    is invalid, or the two points coincide.
    """
    di, dj = direction.value
    pi_, pj = i + di, j + dj
    if not (0 <= pi_ < grid.height and 0 <= pj < grid.width):
        return None
    if not (grid.valid[i, j] and grid.valid[pi_, pj]):
        return None
    p = grid.points[i, j]
    diff = p - grid.points[pi_, pj]
    nd = np.linalg.norm(diff)
    np_ = np.linalg.norm(p)
    if nd == 0 or np_ == 0:
        return None
    cos = np.clip(p @ diff / (np_ * nd), -1.0, 1.0)
    return float(np.arccos(cos))


def bearing_angle_field(grid, direction):
    """Bearing angles for every pixel at once.

    Returns (beta, valid): an (H, W) float array (NaN where undefined)
    and the corresponding mask. Pixels without a predecessor (first row
    and/or column for the given direction) are invalid.
    """
    di, dj = direction.value
    h, w = grid.height, grid.width
    p = grid.points
    prev = np.full_like(p, np.nan)
    prev_valid = np.zeros((h, w), dtype=bool)

    dst_i = slice(max(0, -di), h - max(0, di))
    dst_j = slice(max(0, -dj), w - max(0, dj))
    src_i = slice(max(0, di), h - max(0, -di))
    src_j = slice(max(0, dj), w - max(0, -dj))
    prev[dst_i, dst_j] = p[src_i, src_j]
    prev_valid[dst_i, dst_j] = grid.valid[src_i, src_j]

    diff = p - prev
    nd = np.linalg.norm(diff, axis=-1)
    np_ = np.linalg.norm(p, axis=-1)
    ok = grid.valid & prev_valid & (nd > 0) & (np_ > 0)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.einsum("ijk,ijk->ij", p, diff) / (np_ * nd)
    beta = np.full((h, w), np.nan)
    beta[ok] = np.arccos(np.clip(cos[ok], -1.0, 1.0))
    return beta, ok


def ba_image(grid, direction, bits=8):
    """Render the bearing-angle image for one direction as grayscale.

    Valid pixels hold floor((2**bits - 1) * beta / pi); undefined pixels
    are 0 and flagged invalid.
    """
    beta, ok = bearing_angle_field(grid, direction)
    x = np.where(ok, beta / np.pi, 0.0)
    return quantize_unit(x, ok, bits)
