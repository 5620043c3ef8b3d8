"""Dataset ingestion and image persistence.

Formats handled here:

* 16-bit single-channel PNG depth maps, ``meters = code / depth_scale``
  with code 0 marking missing data (5000 codes per meter by default).
* 8-bit grayscale output as PNG or binary PGM (P5), selected by file
  extension.
* trajectory text files, one ``timestamp tx ty tz qx qy qz qw`` per line.
* association files pairing timestamps with depth (and optionally color)
  image paths.
* plain-text depth dumps (one ASCII float per pixel, row-major) as
  shipped with synthetic benchmark sequences, where the stored value can
  be either the distance along the pixel ray or the orthographic Z.
* sensor-model configuration files (``key = value`` lines).

Parsers are strict: malformed content raises ParseError naming the line
rather than being skipped.
"""

from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import ConfigError, FormatError, ParseError
from .geometry import (DepthImage, PinholeIntrinsics, SphericalIntrinsics,
                       ray_directions)
from .images import GrayImage
from .trajectory import Pose, Trajectory

DEFAULT_DEPTH_SCALE = 5000.0  # 16-bit codes per meter


# -- depth images -----------------------------------------------------------

def read_depth_png(path, depth_scale=DEFAULT_DEPTH_SCALE, kind="depth"):
    """Read a 16-bit single-channel PNG as a DepthImage in meters.

    Raises FormatError when the file is not 16-bit single-channel.
    """
    with Image.open(path) as im:
        if im.mode not in ("I;16", "I;16B", "I"):
            raise FormatError(f"{path}: expected 16-bit single-channel image, got mode {im.mode}")
        codes = np.array(im, dtype=np.int64)
    if codes.ndim != 2:
        raise FormatError(f"{path}: expected a single channel, got shape {codes.shape}")
    if codes.min() < 0 or codes.max() > 0xFFFF:
        raise FormatError(f"{path}: pixel values exceed the 16-bit range")
    values = codes.astype(np.float64) / depth_scale
    return DepthImage(values, kind, codes > 0)


def write_depth_png(img, path, depth_scale=DEFAULT_DEPTH_SCALE):
    """Write a DepthImage as a 16-bit PNG; invalid pixels become code 0."""
    codes = np.rint(img.values * depth_scale)
    if np.any(codes[img.valid] > 0xFFFF):
        raise FormatError(f"{path}: depth exceeds the 16-bit range at scale {depth_scale}")
    codes = np.where(img.valid, codes, 0).astype(np.uint16)
    Image.fromarray(codes).save(path)


def read_depth_txt(path, model, interpretation="ray"):
    """Read a whitespace-separated ASCII depth dump for a pinhole model.

    ``interpretation`` says what the stored numbers are: "ray" for the
    Euclidean distance along the pixel ray (converted to orthographic Z
    here), or "z" for orthographic depth used as-is. Zero and negative
    entries mark missing data.
    """
    if interpretation not in ("ray", "z"):
        raise ConfigError(f"unknown depth interpretation {interpretation!r}")
    if not isinstance(model, PinholeIntrinsics):
        raise ConfigError("text depth dumps are supported for pinhole models only")
    with open(path, "r", encoding="utf-8") as fh:
        tokens = fh.read().split()
    expected = model.width * model.height
    if len(tokens) != expected:
        raise FormatError(
            f"{path}: expected {expected} depth values for "
            f"{model.width}x{model.height}, found {len(tokens)}")
    try:
        flat = np.array([float(t) for t in tokens], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}: non-numeric depth value ({exc})") from None
    values = flat.reshape(model.height, model.width)
    valid = np.isfinite(values) & (values > 0)
    if interpretation == "ray":
        # r = |Z * dir| with dir the unit-depth ray, so Z = r / |dir|
        norms = np.linalg.norm(ray_directions(model), axis=-1)
        values = np.where(valid, values / norms, 0.0)
    else:
        values = np.where(valid, values, 0.0)
    return DepthImage(values, "depth", valid)


# -- grayscale images -------------------------------------------------------

def write_gray(img, path):
    """Write an 8-bit GrayImage; PGM (P5) for .pgm paths, PNG otherwise."""
    if img.width == 0 or img.height == 0:
        raise FormatError(f"{path}: refusing to write an empty {img.width}x{img.height} image")
    if img.bits != 8:
        raise FormatError(f"{path}: only 8-bit grayscale output is supported, got {img.bits}")
    data = np.ascontiguousarray(img.values, dtype=np.uint8)
    if str(path).lower().endswith(".pgm"):
        with open(path, "wb") as fh:
            fh.write(f"P5\n{img.width} {img.height}\n255\n".encode("ascii"))
            fh.write(data.tobytes())
    else:
        Image.fromarray(data, mode="L").save(path)


def write_gray_png(img, path):
    """Write an 8-bit GrayImage as a PNG file."""
    if str(path).lower().endswith(".pgm"):
        raise FormatError(f"{path}: write_gray_png writes PNG; use write_gray for PGM")
    write_gray(img, path)


def read_gray(path):
    """Read an 8-bit grayscale PNG or PGM back as a GrayImage."""
    if str(path).lower().endswith(".pgm"):
        values = _read_pgm(path)
    else:
        with Image.open(path) as im:
            if im.mode != "L":
                raise FormatError(f"{path}: expected 8-bit grayscale, got mode {im.mode}")
            values = np.array(im, dtype=np.uint8)
    return GrayImage(values, np.ones_like(values, dtype=bool), 8)


def _read_pgm(path):
    with open(path, "rb") as fh:
        blob = fh.read()
    fields = []
    pos = 0
    while len(fields) < 4:
        while pos < len(blob) and blob[pos:pos + 1].isspace():
            pos += 1
        if blob[pos:pos + 1] == b"#":
            while pos < len(blob) and blob[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(blob) and not blob[pos:pos + 1].isspace():
            pos += 1
        fields.append(blob[start:pos])
    if fields[0] != b"P5":
        raise FormatError(f"{path}: not a binary PGM (P5) file")
    width, height, maxval = (int(f) for f in fields[1:])
    if maxval != 255:
        raise FormatError(f"{path}: expected 8-bit PGM (maxval 255), got {maxval}")
    pos += 1  # single whitespace byte after the header
    raster = blob[pos:pos + width * height]
    if len(raster) != width * height:
        raise FormatError(f"{path}: truncated PGM raster")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width)


# -- association files ------------------------------------------------------

@dataclass(frozen=True)
class AssociationRecord:
    """One association line: timestamp plus depth (and optional color) path."""

    t: float
    depth_path: str
    raw_t: str
    color_t: float = None
    color_path: str = None


def read_association(path, lenient=False):
    """Parse an association file into ordered AssociationRecords.

    Lines hold either ``timestamp depth_path`` or two timestamp/path
    pairs. For four-token lines the pair whose path contains "depth" is
    taken as the depth pair; if that is ambiguous the first pair is.
    '#' starts a comment. Malformed lines raise ParseError with their
    line number, or are skipped when ``lenient`` is set.
    """
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                if len(tokens) == 2:
                    t = _parse_time(tokens[0], path, lineno)
                    records.append(AssociationRecord(t, tokens[1], tokens[0]))
                elif len(tokens) == 4:
                    t0 = _parse_time(tokens[0], path, lineno)
                    t1 = _parse_time(tokens[2], path, lineno)
                    first_depth = "depth" in tokens[1].lower()
                    second_depth = "depth" in tokens[3].lower()
                    if second_depth and not first_depth:
                        records.append(AssociationRecord(
                            t1, tokens[3], tokens[2], t0, tokens[1]))
                    else:
                        records.append(AssociationRecord(
                            t0, tokens[1], tokens[0], t1, tokens[3]))
                else:
                    raise ParseError(
                        f"expected 2 or 4 whitespace-separated tokens, got {len(tokens)}",
                        path=path, line=lineno)
            except ParseError:
                if not lenient:
                    raise
    return records


def _parse_time(token, path, lineno):
    try:
        return float(token)
    except ValueError:
        raise ParseError(f"non-numeric timestamp {token!r}", path=path, line=lineno) from None


# -- trajectory files -------------------------------------------------------

def read_trajectory(path, lenient=False):
    """Read a trajectory text file (timestamp tx ty tz qx qy qz qw).

    Quaternions are renormalized to absorb the file's limited precision.
    Malformed lines raise ParseError, or are skipped when ``lenient`` is
    set.
    """
    poses = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            try:
                if len(tokens) != 8:
                    raise ParseError(f"expected 8 fields, got {len(tokens)}",
                                     path=path, line=lineno)
                try:
                    vals = [float(t) for t in tokens]
                except ValueError:
                    raise ParseError("non-numeric field", path=path, line=lineno) from None
                q = np.array(vals[4:8])
                norm = np.linalg.norm(q)
                if norm == 0:
                    raise ParseError("zero quaternion", path=path, line=lineno)
                poses.append(Pose(vals[0], np.array(vals[1:4]), q / norm))
            except ParseError:
                if not lenient:
                    raise
    if not poses:
        raise ParseError("no poses found", path=path)
    try:
        return Trajectory(poses)
    except ValueError as exc:
        raise ParseError(str(exc), path=path) from None


def write_trajectory(traj, path):
    """Write a trajectory in the timestamp/translation/quaternion format."""
    with open(path, "w", encoding="utf-8") as fh:
        for p in traj.poses:
            tx, ty, tz = p.translation
            qx, qy, qz, qw = p.rotation
            fh.write(f"{p.t:.6f} {tx:.9f} {ty:.9f} {tz:.9f} "
                     f"{qx:.9f} {qy:.9f} {qz:.9f} {qw:.9f}\n")


# -- sensor model configuration ---------------------------------------------

def read_model_config(path):
    """Read a sensor model from a key = value file.

    Common keys: ``model`` (pinhole | spherical), ``width``, ``height``,
    ``depth_scale`` (optional, default 5000). Pinhole adds ``fx fy cx cy``
    and optional ``s``; spherical adds ``azimuth_min azimuth_max
    polar_min polar_max`` in radians. Returns (model, depth_scale).
    """
    entries = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ParseError("expected 'key = value'", path=path, line=lineno)
            key, value = (part.strip() for part in line.split("=", 1))
            if not key or not value:
                raise ParseError("empty key or value", path=path, line=lineno)
            entries[key] = (value, lineno)

    def take(key, conv=float, required=True, default=None):
        if key not in entries:
            if required:
                raise ConfigError(f"{path}: missing required key {key!r}")
            return default
        value, lineno = entries.pop(key)
        try:
            return conv(value)
        except ValueError:
            raise ParseError(f"invalid value for {key!r}: {value!r}",
                             path=path, line=lineno) from None

    kind = take("model", conv=str)
    width = take("width", conv=int)
    height = take("height", conv=int)
    depth_scale = take("depth_scale", required=False, default=DEFAULT_DEPTH_SCALE)
    if kind == "pinhole":
        model = PinholeIntrinsics(
            fx=take("fx"), fy=take("fy"), cx=take("cx"), cy=take("cy"),
            s=take("s", required=False, default=0.0),
            width=width, height=height)
    elif kind == "spherical":
        model = SphericalIntrinsics(
            azimuth_min=take("azimuth_min"), azimuth_max=take("azimuth_max"),
            polar_min=take("polar_min"), polar_max=take("polar_max"),
            width=width, height=height)
    else:
        raise ConfigError(f"{path}: unknown sensor model {kind!r}")
    if entries:
        stray = ", ".join(sorted(entries))
        raise ConfigError(f"{path}: unrecognized keys: {stray}")
    return model, depth_scale
