"""depthconv: depth/range images to bearing-angle and flexion grayscale images.

The package converts organized depth data (pinhole depth maps, spherical
range images) into detail-highlighting 8-bit images and ships the
supporting pieces: sensor models, median pre-filtering, analytic test
scenes, trajectory metrics (ATE/RPE) and dataset I/O.
"""

from .bearing import BaDirection, ba_image, bearing_angle
from .errors import (AlignmentError, ConfigError, DepthConvError, FormatError,
                     MetricError, ParseError)
from .filtering import median_filter
from .flexion import FlexionVariant, flexion_image, flexion_value
from .geometry import (DepthImage, PinholeIntrinsics, PointGrid,
                       SphericalIntrinsics, depth_to_point_grid,
                       pinhole_backproject, pinhole_project, rot90_grid,
                       spherical_backproject, spherical_project)
from .images import GrayImage
from .synth import render_plane, render_sphere
from .trajectory import (Pose, Trajectory, align_rigid, associate, ate_rmse,
                         rpe_mean)

__version__ = "0.1.0"

__all__ = [
    "AlignmentError", "BaDirection", "ConfigError", "DepthConvError",
    "DepthImage", "FlexionVariant", "FormatError", "GrayImage", "MetricError",
    "ParseError", "PinholeIntrinsics", "PointGrid", "Pose",
    "SphericalIntrinsics", "Trajectory", "align_rigid", "associate",
    "ate_rmse", "ba_image", "bearing_angle", "depth_to_point_grid",
    "flexion_image", "flexion_value", "median_filter", "pinhole_backproject",
    "pinhole_project", "render_plane", "render_sphere", "rot90_grid",
    "rpe_mean", "spherical_backproject", "spherical_project",
]
