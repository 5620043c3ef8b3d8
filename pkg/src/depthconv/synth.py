"""Analytic depth-image rendering for planes and spheres.

These renders serve as ground truth for the conversion code: every valid
pixel's back-projected point satisfies the surface equation in closed
form, so downstream values (bearing angles, flexion values) can be checked
against independent formulations.
"""

import numpy as np

from .errors import ConfigError
from .geometry import DepthImage, ray_directions


def render_plane(model, normal, offset, noise_sigma=0.0, seed=0):
    """Render the plane {x : normal . x = offset} seen from the origin.

    ``normal`` need not be unit length (it is normalized); ``offset`` is
    the signed distance in meters along the unit normal. Planes through
    the origin are rejected: every ray would hit at distance 0 or never.
    Pixels whose ray misses the plane, or hits it behind the sensor, are
    invalid. Optional zero-mean Gaussian noise (reproducible via ``seed``)
    is added to the stored values.
    """
    normal = np.asarray(normal, dtype=np.float64)
    norm = np.linalg.norm(normal)
    if norm == 0:
        raise ConfigError("plane normal must be non-zero")
    normal = normal / norm
    if offset == 0:
        raise ConfigError("plane must not pass through the sensor origin")

    # Pinhole rays have Z component 1, so the hit parameter t is directly
    # the orthographic depth; spherical rays are unit length, so t is the
    # range. Either way t is the stored value.
    dirs = ray_directions(model)
    slope = dirs @ normal
    with np.errstate(divide="ignore", invalid="ignore"):
        t = offset / slope
    hit = np.isfinite(t) & (t > 0)
    values = np.where(hit, t, 0.0)
    return _finalize(values, hit, model, noise_sigma, seed)


def render_sphere(model, center, radius, noise_sigma=0.0, seed=0):
    """Render a sphere; each pixel stores the nearest ray intersection.

    Raises ConfigError for non-positive radius or when the sensor origin
    lies inside (or on) the sphere. Rays that miss yield invalid pixels.
    """
    center = np.asarray(center, dtype=np.float64)
    if radius <= 0:
        raise ConfigError(f"sphere radius must be positive, got {radius}")
    c2 = center @ center
    if c2 <= radius * radius:
        raise ConfigError("sensor origin lies inside the sphere")

    dirs = ray_directions(model)
    # |t*dir - c|^2 = R^2  ->  a t^2 - 2 b t + c0 = 0
    a = np.einsum("ijk,ijk->ij", dirs, dirs)
    b = dirs @ center
    c0 = c2 - radius * radius
    disc = b * b - a * c0
    with np.errstate(invalid="ignore"):
        sq = np.sqrt(disc)
    t = (b - sq) / a  # nearest root; c0 > 0 so both roots share b's sign
    hit = (disc >= 0) & (t > 0)
    values = np.where(hit, t, 0.0)
    return _finalize(values, hit, model, noise_sigma, seed)


def _finalize(values, hit, model, noise_sigma, seed):
    if noise_sigma > 0:
        rng = np.random.default_rng(seed)
        values = values + np.where(hit, rng.normal(0.0, noise_sigma, values.shape), 0.0)
        hit = hit & (values > 0)
        values = np.where(hit, values, 0.0)
    return DepthImage(values, model.kind, hit)
