"""Grayscale output images and the value-to-gray quantization."""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

# Absolute guard added before flooring. Geometry that lands exactly on a
# gray level (flat surfaces, right angles) evaluates a few ulps below the
# ideal value in floating point; without the guard such pixels would fall
# one level short. 1e-9 is far below half a gray step (~2e-3) and far
# above accumulated rounding error (~1e-13).
_FLOOR_GUARD = 1e-9


@dataclass
class GrayImage:
    """H x W single-channel image with a validity mask.

    Pixels flagged invalid hold 0. ``bits`` is the color depth; values
    are stored as uint8 for up to 8 bits, uint16 above.
    """

    values: np.ndarray
    valid: np.ndarray
    bits: int = 8

    def __post_init__(self):
        self.values = np.asarray(self.values)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.values.ndim != 2:
            raise ConfigError(f"gray image must be 2-D, got shape {self.values.shape}")
        if self.valid.shape != self.values.shape:
            raise ConfigError("validity mask shape does not match values")
        if not (1 <= self.bits <= 16):
            raise ConfigError(f"unsupported color depth {self.bits}")

    @property
    def height(self):
        return self.values.shape[0]

    @property
    def width(self):
        return self.values.shape[1]


def gray_levels(bits):
    """Largest representable gray value, 2**bits - 1."""
    return (1 << bits) - 1


def quantize_unit(x, valid, bits=8):
    """Map values in [0, 1] to a GrayImage: g = floor((2**bits - 1) * x).

    ``x`` is clamped into [0, 1] first; invalid pixels become 0.
    """
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, 1.0)
    top = gray_levels(bits)
    g = np.floor(top * x + _FLOOR_GUARD)
    g = np.minimum(g, top)
    dtype = np.uint8 if bits <= 8 else np.uint16
    out = np.where(valid, g, 0).astype(dtype)
    return GrayImage(out, np.asarray(valid, dtype=bool).copy(), bits)
