"""Flexion images: surface curvature from two independent local normals.

For a point P(i,j) on an organized grid, four unit difference vectors are
formed from opposing neighbors at offset k = (n-1)/2:

    d_h over columns (i, j-k) -> (i, j+k)
    d_v over rows    (i-k, j) -> (i+k, j)
    d_d over the diagonal     (i-k, j-k) -> (i+k, j+k)
    d_a over the antidiagonal (i-k, j+k) -> (i+k, j-k)

The first normal n1 = d_h x d_v is spanned by the axis neighbors, the
second n2 = d_d x d_a by the diagonal ones. The flexion value is the dot
product F = n1 . n2 in [-1, 1]: the normals are left unnormalized, so F
encodes both their agreement in direction and how far the neighbor
vectors depart from right angles. Flat surfaces viewed at a slant get
progressively shorter normals, hence the gradient shading; a 90-degree
roll of the grid only exchanges the roles of the two normals and leaves
F unchanged.

Variants: "angle" maps the angle between the normals to
1 - arccos(n1 . n2 / (|n1| |n2|)) / pi, and "normalized" uses the dot
product of the unit normals. Both discard the length information and
with it the gradient shading.

The field computation expands the cross products with the Binet-Cauchy
identity, (a x b).(c x d) = (a.c)(b.d) - (a.d)(b.c), so only pairwise
dot products of the raw difference vectors are needed. Operands are
grouped so that a 90-degree grid rotation reproduces bit-identical
values.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .images import quantize_unit

VARIANT_KINDS = ("standard", "angle", "normalized")


@dataclass(frozen=True)
class FlexionVariant:
    """Which flexion flavor to compute; n is the neighborhood grid size."""

    kind: str
    n: int = 3

    def __post_init__(self):
        if self.kind not in VARIANT_KINDS:
            raise ConfigError(f"unknown flexion variant {self.kind!r}")
        if self.n % 2 == 0 or not (3 <= self.n <= 13):
            raise ConfigError(f"flexion grid size must be odd and in [3, 13], got {self.n}")

    @classmethod
    def standard(cls, n=3):
        return cls("standard", n)

    @classmethod
    def angle(cls):
        return cls("angle")

    @classmethod
    def normalized(cls):
        return cls("normalized")

    @classmethod
    def parse(cls, spec):
        """Parse a method string: an odd grid size, "angle" or "normalized"."""
        if spec in ("angle", "normalized"):
            return cls(spec)
        try:
            n = int(spec)
        except ValueError:
            raise ValueError(f"unknown flexion variant {spec!r}") from None
        return cls.standard(n)

    @property
    def offset(self):
        return (self.n - 1) // 2


def _dot(a, b):
    return np.einsum("ijc,ijc->ij", a, b)


def _difference_field(grid, k):
    """Raw opposing-neighbor differences on the interior and joint validity.

    Returns (d_h, d_v, d_d, d_a, ok) where the arrays cover pixels
    (k..H-k, k..W-k) and ok requires the center and all eight involved
    neighbors to be valid.
    """
    if 2 * k + 1 > min(grid.height, grid.width):
        raise ConfigError(
            f"neighborhood {2 * k + 1}x{2 * k + 1} does not fit a "
            f"{grid.width}x{grid.height} grid")
    p, v = grid.points, grid.valid
    h, w = v.shape
    rows = slice(k, h - k)
    cols = slice(k, w - k)
    d_h = p[rows, 2 * k:] - p[rows, :w - 2 * k]
    d_v = p[2 * k:, cols] - p[:h - 2 * k, cols]
    d_d = p[2 * k:, 2 * k:] - p[:h - 2 * k, :w - 2 * k]
    d_a = p[2 * k:, :w - 2 * k] - p[:h - 2 * k, 2 * k:]
    ok = (v[rows, cols]
          & v[rows, 2 * k:] & v[rows, :w - 2 * k]
          & v[2 * k:, cols] & v[:h - 2 * k, cols]
          & v[2 * k:, 2 * k:] & v[:h - 2 * k, :w - 2 * k]
          & v[2 * k:, :w - 2 * k] & v[:h - 2 * k, 2 * k:])
    return d_h, d_v, d_d, d_a, ok


def _flexion_core(grid, k, need_normal_lengths):
    """Interior F values plus (optionally) the unit-normal lengths.

    F is computed from pairwise dot products of the raw differences; the
    unit-length normalization of the difference vectors reduces to the
    single division by sqrt(|d_h|^2 |d_v|^2) * sqrt(|d_d|^2 |d_a|^2).
    """
    d_h, d_v, d_d, d_a, ok = _difference_field(grid, k)
    nh2 = _dot(d_h, d_h)
    nv2 = _dot(d_v, d_v)
    nd2 = _dot(d_d, d_d)
    na2 = _dot(d_a, d_a)
    ok = ok & (nh2 > 0) & (nv2 > 0) & (nd2 > 0) & (na2 > 0)
    numerator = _dot(d_h, d_d) * _dot(d_v, d_a) - _dot(d_h, d_a) * _dot(d_v, d_d)
    axis_sq = nh2 * nv2
    diag_sq = nd2 * na2
    with np.errstate(invalid="ignore", divide="ignore"):
        f = numerator / (np.sqrt(axis_sq) * np.sqrt(diag_sq))
        if need_normal_lengths:
            hv = _dot(d_h, d_v)
            da = _dot(d_d, d_a)
            # |u x w|^2 = 1 - (u.w)^2 for unit vectors
            l1 = np.sqrt(np.clip(1.0 - hv * hv / axis_sq, 0.0, None))
            l2 = np.sqrt(np.clip(1.0 - da * da / diag_sq, 0.0, None))
            return f, l1, l2, ok
    return f, None, None, ok


def flexion_values(grid, k=1):
    """Per-pixel F = n1 . n2 as an (H, W) array with NaN where undefined."""
    h, w = grid.height, grid.width
    f_int, _, _, ok_int = _flexion_core(grid, k, need_normal_lengths=False)
    values = np.full((h, w), np.nan)
    ok = np.zeros((h, w), dtype=bool)
    ok[k:h - k, k:w - k] = ok_int
    values[k:h - k, k:w - k] = np.where(ok_int, f_int, np.nan)
    return values, ok


def flexion_value(grid, i, j, k=1):
    """Flexion value F = n1 . n2 at one pixel, or None when undefined.

    Computed geometrically (explicit unit vectors and cross products),
    which doubles as an independent check of the field formulation.
    Undefined when any of the eight required neighbors is invalid, lies
    outside the grid, or a difference vector degenerates to zero length.
    """
    h, w = grid.height, grid.width
    if not (k <= i < h - k and k <= j < w - k):
        return None
    if not grid.valid[i, j]:
        return None
    pairs = (((i, j + k), (i, j - k)),
             ((i + k, j), (i - k, j)),
             ((i + k, j + k), (i - k, j - k)),
             ((i + k, j - k), (i - k, j + k)))
    units = []
    for fwd, bwd in pairs:
        if not (grid.valid[fwd] and grid.valid[bwd]):
            return None
        diff = grid.points[fwd] - grid.points[bwd]
        norm = np.linalg.norm(diff)
        if norm == 0:
            return None
        units.append(diff / norm)
    d_h, d_v, d_d, d_a = units
    return float(np.cross(d_h, d_v) @ np.cross(d_d, d_a))


def flexion_image(grid, variant=FlexionVariant.standard(3), bits=8, full_range=False):
    """Render a flexion image as grayscale.

    standard:   g = floor((2**bits - 1) * clamp(F, 0, 1))
    angle:      g = floor((2**bits - 1) * (1 - arccos(n1.n2 / (|n1||n2|)) / pi))
    normalized: g = floor((2**bits - 1) * clamp(unit(n1) . unit(n2), 0, 1))

    With ``full_range`` the standard/normalized dot products are mapped
    linearly from [-1, 1] to the full gray range instead of clamping
    negatives, preserving concave/convex sign information. Undefined
    pixels are 0 and flagged invalid.
    """
    k = variant.offset
    h, w = grid.height, grid.width
    need_lengths = variant.kind != "standard"
    f, l1, l2, ok_int = _flexion_core(grid, k, need_lengths)

    if variant.kind == "standard":
        x_int = f
    else:
        ok_int = ok_int & (l1 > 0) & (l2 > 0)
        with np.errstate(invalid="ignore", divide="ignore"):
            cos = np.clip(f / (l1 * l2), -1.0, 1.0)
        if variant.kind == "angle":
            x_int = 1.0 - np.arccos(cos) / np.pi
        else:
            x_int = cos

    if full_range and variant.kind != "angle":
        x_int = (x_int + 1.0) / 2.0

    x = np.zeros((h, w))
    ok = np.zeros((h, w), dtype=bool)
    ok[k:h - k, k:w - k] = ok_int
    x[k:h - k, k:w - k] = np.where(ok_int, x_int, 0.0)
    return quantize_unit(x, ok, bits)
