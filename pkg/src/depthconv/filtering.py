"""Edge-preserving median filtering of depth images.

The filter replaces each valid pixel with the median of the valid values
inside a window centered on it, with the window clipped at the image
bounds. Invalid pixels are excluded from the window population and stay
invalid in the output. When the population count is even (borders, or
windows containing invalid pixels) the lower of the two middle values is
taken, so the output value is always one of the input values and results
are exact at any quantization; no averaging happens anywhere.

Pixels whose window is fully inside the image and fully valid (the bulk)
are filtered with an exact C selection filter; the remaining pixels
(border band, windows touching invalid pixels) take a vectorized
gather-and-select path that honors clipping and exclusion.
"""

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .geometry import DepthImage


def median_filter(img, window_w=3, window_h=None):
    """Median-filter a DepthImage with a window of window_w x window_h pixels.

    Window sides must be odd and >= 1; window_h defaults to window_w.
    A 1x1 window returns an identical copy. The validity mask is
    preserved exactly.
    """
    if window_h is None:
        window_h = window_w
    if window_w < 1 or window_h < 1 or window_w % 2 == 0 or window_h % 2 == 0:
        raise ConfigError(f"window sides must be odd and >= 1, got {window_w}x{window_h}")
    if window_w == 1 and window_h == 1:
        return img.copy()

    values, valid = img.values, img.valid
    h, w = values.shape
    out = np.zeros_like(values)
    if not valid.any():
        return DepthImage(out, img.kind, valid.copy())

    rw, rh = window_w // 2, window_h // 2

    # Pixels whose window is complete: fully inside the image and with no
    # invalid pixel in it. Everything else goes to the fallback path.
    if valid.all():
        complete = np.ones((h, w), dtype=bool)
    else:
        complete = _box_count(~valid, window_w, window_h) == 0
    complete[:rh, :] = False
    complete[h - rh:, :] = False
    complete[:, :rw] = False
    complete[:, w - rw:] = False

    if complete.any():
        n = window_w * window_h  # odd, so rank (n-1)//2 is the true median
        med = ndimage.rank_filter(values, rank=(n - 1) // 2, size=(window_h, window_w))
        out[complete] = med[complete]

    fallback = valid & ~complete
    if fallback.any():
        out[fallback] = _masked_median_at(values, valid, fallback, window_w, window_h)

    return DepthImage(out, img.kind, valid.copy())


def _box_count(mask, window_w, window_h):
    """Per-pixel count of True entries in the clipped window around it."""
    rw, rh = window_w // 2, window_h // 2
    h, w = mask.shape
    # summed-area table with a zero border row/column
    sat = np.zeros((h + 1, w + 1), dtype=np.int64)
    sat[1:, 1:] = np.cumsum(np.cumsum(mask.astype(np.int64), axis=0), axis=1)
    i = np.arange(h)[:, None]
    j = np.arange(w)[None, :]
    top = np.clip(i - rh, 0, h)
    bot = np.clip(i + rh + 1, 0, h)
    left = np.clip(j - rw, 0, w)
    right = np.clip(j + rw + 1, 0, w)
    return sat[bot, right] - sat[top, right] - sat[bot, left] + sat[top, left]


def _masked_median_at(values, valid, where, window_w, window_h):
    """Lower median of valid window values at the selected pixels.

    Gathers each selected pixel's window rows from a NaN-padded copy,
    sorts (NaNs last) and picks index (count - 1) // 2. Only called for
    pixels that are themselves valid, so the population is never empty.
    """
    rw, rh = window_w // 2, window_h // 2
    h, w = values.shape
    padded = np.full((h + 2 * rh, w + 2 * rw), np.nan)
    padded[rh:rh + h, rw:rw + w] = np.where(valid, values, np.nan)

    ii, jj = np.nonzero(where)
    offs_i = np.arange(window_h).reshape(1, window_h, 1)
    offs_j = np.arange(window_w).reshape(1, 1, window_w)
    windows = padded[ii[:, None, None] + offs_i,
                     jj[:, None, None] + offs_j].reshape(len(ii), -1)
    windows.sort(axis=1)
    counts = np.count_nonzero(~np.isnan(windows), axis=1)
    pick = (counts - 1) // 2
    return windows[np.arange(len(ii)), pick]
