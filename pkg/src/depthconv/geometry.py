"""Sensor models and conversion between pixels, depth values and 3D points.

Two camera models are supported:

* pinhole: distortion-free intrinsic matrix ``[[fx, s, cx], [0, fy, cy],
  [0, 0, 1]]``, paired with orthographic depth maps (stored value is Z).
* spherical (equirectangular): azimuth mapped to image width, polar angle
  to image height at fixed angular resolution, paired with range images
  (stored value is the Euclidean distance r from the sensor center).

Pixel coordinates are continuous; the center of pixel (column j, row i) is
(u, v) = (j, i). Row index i increases downward, column j rightward.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Valid depth/range values are finite and strictly positive; 0 encodes
# "no reading" (the usual depth-map convention).
KIND_DEPTH = "depth"
KIND_RANGE = "range"


@dataclass(frozen=True)
class PinholeIntrinsics:
    """Pinhole camera parameters. Focal lengths and principal point in pixels."""

    fx: float
    fy: float
    cx: float
    cy: float
    width: int
    height: int
    s: float = 0.0

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ConfigError(f"focal lengths must be positive, got fx={self.fx}, fy={self.fy}")
        if self.width < 3 or self.height < 3:
            raise ConfigError(f"image size must be at least 3x3, got {self.width}x{self.height}")

    @property
    def kind(self):
        return KIND_DEPTH

    def matrix(self):
        """The 3x3 intrinsic matrix K."""
        return np.array([[self.fx, self.s, self.cx],
                         [0.0, self.fy, self.cy],
                         [0.0, 0.0, 1.0]])


@dataclass(frozen=True)
class SphericalIntrinsics:
    """Equirectangular model: angular ranges in radians plus image size.

    Azimuth spans [azimuth_min, azimuth_max) over the image width, polar
    angle spans [polar_min, polar_max] over the height. The per-pixel
    angular resolutions follow from the ranges and the image size.
    """

    azimuth_min: float
    azimuth_max: float
    polar_min: float
    polar_max: float
    width: int
    height: int

    def __post_init__(self):
        if not (0.0 <= self.azimuth_min < self.azimuth_max <= 2.0 * np.pi + 1e-12):
            raise ConfigError(
                f"azimuth range [{self.azimuth_min}, {self.azimuth_max}] not inside [0, 2*pi]")
        if not (0.0 <= self.polar_min < self.polar_max <= np.pi + 1e-12):
            raise ConfigError(
                f"polar range [{self.polar_min}, {self.polar_max}] not inside [0, pi]")
        if self.width < 3 or self.height < 3:
            raise ConfigError(f"image size must be at least 3x3, got {self.width}x{self.height}")

    @property
    def kind(self):
        return KIND_RANGE

    @property
    def dazimuth(self):
        """Horizontal angular resolution (radians per pixel)."""
        return (self.azimuth_max - self.azimuth_min) / self.width

    @property
    def dpolar(self):
        """Vertical angular resolution (radians per pixel)."""
        return (self.polar_max - self.polar_min) / self.height


@dataclass
class DepthImage:
    """H x W grid of metric depth or range values with a validity mask.

    ``kind`` is either "depth" (orthographic Z, pinhole) or "range"
    (Euclidean distance from sensor center, spherical). Values must be
    finite and > 0 wherever valid; 0 or non-finite marks missing data.
    """

    values: np.ndarray
    kind: str
    valid: np.ndarray = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise ConfigError(f"depth values must be 2-D, got shape {self.values.shape}")
        if self.kind not in (KIND_DEPTH, KIND_RANGE):
            raise ConfigError(f"unknown depth kind {self.kind!r}")
        if self.valid is None:
            self.valid = np.isfinite(self.values) & (self.values > 0)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
            if self.valid.shape != self.values.shape:
                raise ConfigError("validity mask shape does not match values")
            bad = self.valid & ~(np.isfinite(self.values) & (self.values > 0))
            if np.any(bad):
                raise ConfigError("valid pixels must hold finite positive values")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]

    def copy(self):
        return DepthImage(self.values.copy(), self.kind, self.valid.copy())


@dataclass
class PointGrid:
    """Organized point cloud: 3D points stored on the source pixel lattice.

    ``points`` has shape (H, W, 3) in the sensor frame (sensor center at
    the origin); entries at invalid cells are NaN.
    """

    points: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=np.float64)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.points.ndim != 3 or self.points.shape[2] != 3:
            raise ConfigError(f"point grid must have shape (H, W, 3), got {self.points.shape}")
        if self.valid.shape != self.points.shape[:2]:
            raise ConfigError("validity mask shape does not match point grid")

    @property
    def height(self):
        return self.points.shape[0]

    @property
    def width(self):
        return self.points.shape[1]


def pinhole_project(p, intr):
    """Project 3D point(s) in the camera frame to pixel coordinates (u, v).

    u = (fx*X + s*Y + cx*Z) / Z,  v = (fy*Y + cy*Z) / Z.

    ``p`` is array-like with shape (..., 3); returns an array of shape
    (..., 2). Raises ValueError for points at or behind the camera plane
    (Z <= 0).
    """
    p = np.asarray(p, dtype=np.float64)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    if np.any(z <= 0):
        raise ValueError("cannot project point(s) with Z <= 0")
    u = (intr.fx * x + intr.s * y) / z + intr.cx
    v = intr.fy * y / z + intr.cy
    return np.stack([u, v], axis=-1)


def pinhole_backproject(u, v, d, intr):
    """Lift pixel(s) (u, v) with orthographic depth d back to 3D.

    Inverse of :func:`pinhole_project`: Z = d, Y = d*(v - cy)/fy,
    X = d*((u - cx) - s*(v - cy)/fy)/fx. Raises ValueError for d <= 0.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if np.any(d <= 0):
        raise ValueError("cannot back-project with depth <= 0")
    yn = (v - intr.cy) / intr.fy
    xn = ((u - intr.cx) - intr.s * yn) / intr.fx
    return np.stack(np.broadcast_arrays(xn * d, yn * d, d * np.ones_like(u)), axis=-1)


def spherical_project(p, intr):
    """Project 3D point(s) to equirectangular pixel coordinates (u, v).

    The point is converted to spherical coordinates r = |p|,
    azimuth = atan2(Y, X) wrapped into [0, 2*pi), polar = arccos(Z/r),
    then scaled by the angular resolutions. At the poles the azimuth is
    defined as 0. Raises ValueError for zero-length points.
    """
    p = np.asarray(p, dtype=np.float64)
    x, y, z = p[..., 0], p[..., 1], p[..., 2]
    r = np.sqrt(x * x + y * y + z * z)
    if np.any(r <= 0):
        raise ValueError("cannot project zero-length point(s)")
    azimuth = np.arctan2(y, x)
    azimuth = np.where(azimuth < 0, azimuth + 2.0 * np.pi, azimuth)
    azimuth = np.where((x == 0) & (y == 0), 0.0, azimuth)
    polar = np.arccos(np.clip(z / r, -1.0, 1.0))
    u = (azimuth - intr.azimuth_min) / intr.dazimuth
    v = (polar - intr.polar_min) / intr.dpolar
    return np.stack(np.broadcast_arrays(u, v), axis=-1)


def spherical_backproject(u, v, r, intr):
    """Lift equirectangular pixel(s) with range r back to 3D.

    azimuth = azimuth_min + u*dazimuth, polar = polar_min + v*dpolar,
    p = r * (sin(polar)cos(azimuth), sin(polar)sin(azimuth), cos(polar)).
    Raises ValueError for r <= 0.
    """
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    r = np.asarray(r, dtype=np.float64)
    if np.any(r <= 0):
        raise ValueError("cannot back-project with range <= 0")
    azimuth = intr.azimuth_min + u * intr.dazimuth
    polar = intr.polar_min + v * intr.dpolar
    sp = np.sin(polar)
    return np.stack(np.broadcast_arrays(r * sp * np.cos(azimuth),
                                        r * sp * np.sin(azimuth),
                                        r * np.cos(polar)), axis=-1)


def ray_directions(model):
    """Per-pixel ray directions through all pixel centers, shape (H, W, 3).

    For the pinhole model the direction is the back-projection at unit
    depth (Z component 1, not normalized); for the spherical model it is
    the unit vector at the pixel's angles.
    """
    jj, ii = np.meshgrid(np.arange(model.width, dtype=np.float64),
                         np.arange(model.height, dtype=np.float64))
    if isinstance(model, PinholeIntrinsics):
        return pinhole_backproject(jj, ii, np.ones_like(jj), model)
    if isinstance(model, SphericalIntrinsics):
        return spherical_backproject(jj, ii, np.ones_like(jj), model)
    raise ConfigError(f"unsupported sensor model {type(model).__name__}")


def depth_to_point_grid(img, model):
    """Back-project every valid pixel of ``img`` into an organized PointGrid.

    The image kind must match the model (depth with pinhole, range with
    spherical) and the sizes must agree; mismatches raise ConfigError.
    Grid adjacency equals pixel adjacency; invalid pixels yield NaN points.
    """
    if img.kind != model.kind:
        raise ConfigError(
            f"image kind {img.kind!r} cannot be paired with {type(model).__name__}")
    if (img.height, img.width) != (model.height, model.width):
        raise ConfigError(
            f"image size {img.width}x{img.height} does not match model "
            f"{model.width}x{model.height}")
    dirs = ray_directions(model)
    points = dirs * img.values[..., None]
    points[~img.valid] = np.nan
    return PointGrid(points, img.valid.copy())


def rot90_grid(grid, k=1):
    """Rotate an organized point grid by k*90 degrees counterclockwise.

    Rotates the array layout only (the 3D points themselves are
    untouched); useful for studying how the image conversions respond to
    sensor roll.
    """
    return PointGrid(np.rot90(grid.points, k, axes=(0, 1)).copy(),
                     np.rot90(grid.valid, k).copy())
