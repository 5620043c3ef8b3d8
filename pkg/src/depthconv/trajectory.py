"""Timestamped SE(3) trajectories, association, alignment and error metrics.

The metrics follow the usual RGB-D benchmarking conventions: absolute
trajectory error is the RMSE of translational residuals after closed-form
rigid alignment (global consistency), relative pose error is the mean
translational magnitude of the per-step relative-motion discrepancy
(drift). Quaternions are stored (qx, qy, qz, qw).
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import AlignmentError, MetricError

DEFAULT_MAX_DT = 0.02  # seconds


@dataclass(frozen=True)
class Pose:
    """One timestamped pose: translation in meters, unit quaternion rotation."""

    t: float
    translation: np.ndarray
    rotation: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "translation", np.asarray(self.translation, dtype=np.float64))
        object.__setattr__(self, "rotation", np.asarray(self.rotation, dtype=np.float64))
        if self.translation.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {self.translation.shape}")
        if self.rotation.shape != (4,):
            raise ValueError("rotation must be a quaternion (qx, qy, qz, qw)")
        norm = np.linalg.norm(self.rotation)
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"quaternion norm {norm} deviates from 1 by more than 1e-9")

    def matrix(self):
        """Homogeneous 4x4 transform."""
        m = np.eye(4)
        m[:3, :3] = quat_to_matrix(self.rotation)
        m[:3, 3] = self.translation
        return m


class Trajectory:
    """Time-ordered, non-empty sequence of poses."""

    def __init__(self, poses):
        poses = list(poses)
        if not poses:
            raise ValueError("trajectory must contain at least one pose")
        times = [p.t for p in poses]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ValueError("timestamps must be strictly increasing")
        self.poses = poses

    def __len__(self):
        return len(self.poses)

    def __getitem__(self, idx):
        return self.poses[idx]

    @property
    def times(self):
        return np.array([p.t for p in self.poses])

    @property
    def positions(self):
        return np.array([p.translation for p in self.poses])

    def transformed(self, rot, trans):
        """The trajectory moved by a global rigid transform (R, t)."""
        rot = np.asarray(rot, dtype=np.float64)
        trans = np.asarray(trans, dtype=np.float64)
        qr = matrix_to_quat(rot)
        return Trajectory([
            Pose(p.t, rot @ p.translation + trans, quat_multiply(qr, p.rotation))
            for p in self.poses
        ])


def quat_to_matrix(q):
    """Rotation matrix of a unit quaternion (qx, qy, qz, qw)."""
    x, y, z, w = q
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])


def matrix_to_quat(m):
    """Unit quaternion (qx, qy, qz, qw) of a rotation matrix."""
    m = np.asarray(m, dtype=np.float64)
    t = np.trace(m)
    if t > 0:
        s = np.sqrt(t + 1.0) * 2
        w = 0.25 * s
        x = (m[2, 1] - m[1, 2]) / s
        y = (m[0, 2] - m[2, 0]) / s
        z = (m[1, 0] - m[0, 1]) / s
    else:
        i = int(np.argmax(np.diag(m)))
        j, k = (i + 1) % 3, (i + 2) % 3
        s = np.sqrt(max(m[i, i] - m[j, j] - m[k, k] + 1.0, 0.0)) * 2
        v = [0.0, 0.0, 0.0]
        v[i] = 0.25 * s
        v[j] = (m[j, i] + m[i, j]) / s
        v[k] = (m[k, i] + m[i, k]) / s
        w = (m[k, j] - m[j, k]) / s
        x, y, z = v
    q = np.array([x, y, z, w])
    return q / np.linalg.norm(q)


def quat_multiply(a, b):
    """Hamilton product a * b for (qx, qy, qz, qw) quaternions."""
    ax, ay, az, aw = a
    bx, by, bz, bw = b
    return np.array([
        aw * bx + ax * bw + ay * bz - az * by,
        aw * by - ax * bz + ay * bw + az * bx,
        aw * bz + ax * by - ay * bx + az * bw,
        aw * bw - ax * bx - ay * by - az * bz,
    ])


def associate(a, b, max_dt=DEFAULT_MAX_DT):
    """Greedy one-to-one timestamp matching between two trajectories.

    All candidate pairs within ``max_dt`` seconds are considered in order
    of ascending time difference; each pose is used at most once. Returns
    index pairs (ia, ib) sorted by ia. An empty result means the time
    ranges do not overlap within the tolerance.
    """
    if max_dt <= 0:
        raise ValueError(f"max_dt must be positive, got {max_dt}")
    ta, tb = a.times, b.times
    cands = []
    for ia, t in enumerate(ta):
        lo = np.searchsorted(tb, t - max_dt)
        hi = np.searchsorted(tb, t + max_dt, side="right")
        for ib in range(lo, hi):
            cands.append((abs(t - tb[ib]), ia, ib))
    cands.sort()
    used_a, used_b = set(), set()
    pairs = []
    for _, ia, ib in cands:
        if ia in used_a or ib in used_b:
            continue
        used_a.add(ia)
        used_b.add(ib)
        pairs.append((ia, ib))
    pairs.sort()
    return pairs


def align_rigid(est, ref):
    """Closed-form least-squares rigid alignment of paired point sets.

    Returns (R, t) minimizing sum |R @ est_i + t - ref_i|^2 with R a
    proper rotation (no scale, no reflection). Requires at least 3
    non-collinear pairs; degenerate inputs raise AlignmentError.
    """
    est = np.asarray(est, dtype=np.float64)
    ref = np.asarray(ref, dtype=np.float64)
    if est.shape != ref.shape or est.ndim != 2 or est.shape[1] != 3:
        raise AlignmentError("point sets must both have shape (N, 3)")
    n = est.shape[0]
    if n < 3:
        raise AlignmentError(f"need at least 3 point pairs, got {n}")
    mu_e = est.mean(axis=0)
    mu_r = ref.mean(axis=0)
    cov = (ref - mu_r).T @ (est - mu_e)
    u, sv, vt = np.linalg.svd(cov)
    # collinear pairs leave the rotation about the line unconstrained
    if sv[1] <= 1e-9 * sv[0]:
        raise AlignmentError("point pairs are collinear; rotation is underdetermined")
    d = np.sign(np.linalg.det(u @ vt))
    if d == 0:
        d = 1.0
    rot = u @ np.diag([1.0, 1.0, d]) @ vt
    trans = mu_r - rot @ mu_e
    return rot, trans


def ate_rmse(est, gt, max_dt=DEFAULT_MAX_DT):
    """Absolute trajectory error: RMSE of residuals after rigid alignment.

    Residual statistics beyond the RMSE are available via
    :func:`ate_statistics`.
    """
    return ate_statistics(est, gt, max_dt)["rmse"]


def ate_statistics(est, gt, max_dt=DEFAULT_MAX_DT):
    """ATE residual statistics: rmse, mean, median, p95, max, pair count."""
    pairs = associate(est, gt, max_dt)
    if len(pairs) < 3:
        raise MetricError(
            f"need at least 3 associated pose pairs for ATE, got {len(pairs)}")
    p_est = est.positions[[ia for ia, _ in pairs]]
    p_gt = gt.positions[[ib for _, ib in pairs]]
    rot, trans = align_rigid(p_est, p_gt)
    residuals = np.linalg.norm(p_est @ rot.T + trans - p_gt, axis=1)
    return _statistics(residuals, np.sqrt(np.mean(residuals ** 2)))


def rpe_mean(est, gt, delta=1, max_dt=DEFAULT_MAX_DT):
    """Relative pose error: mean translational drift per ``delta`` frames."""
    return rpe_statistics(est, gt, delta, max_dt)["mean"]


def rpe_statistics(est, gt, delta=1, max_dt=DEFAULT_MAX_DT):
    """RPE statistics over all index pairs (i, i + delta) of associated poses.

    The per-pair error is the translational magnitude of
    (Q_i^-1 Q_{i+delta})^-1 (P_i^-1 P_{i+delta}) with Q the ground-truth
    and P the estimated motion. Reported statistic of record is the mean.
    """
    if int(delta) != delta or delta < 1:
        raise ValueError(f"delta must be a positive whole number of frames, got {delta}")
    delta = int(delta)
    pairs = associate(est, gt, max_dt)
    if len(pairs) <= delta:
        raise MetricError(
            f"need more than {delta} associated pose pairs for RPE, got {len(pairs)}")
    m_est = [est[ia].matrix() for ia, _ in pairs]
    m_gt = [gt[ib].matrix() for _, ib in pairs]
    errors = []
    for i in range(len(pairs) - delta):
        rel_est = np.linalg.inv(m_est[i]) @ m_est[i + delta]
        rel_gt = np.linalg.inv(m_gt[i]) @ m_gt[i + delta]
        err = np.linalg.inv(rel_gt) @ rel_est
        errors.append(np.linalg.norm(err[:3, 3]))
    errors = np.array(errors)
    return _statistics(errors, errors.mean())


def _statistics(residuals, headline):
    return {
        "rmse": float(np.sqrt(np.mean(residuals ** 2))),
        "mean": float(residuals.mean()),
        "median": float(np.median(residuals)),
        "p95": float(np.percentile(residuals, 95)),
        "max": float(residuals.max()),
        "count": int(residuals.size),
        "value": float(headline),
    }
