"""Eye-in-hand mapping: joint angles -> nine stereo image features, and back.

Markers live in the base frame {O} in meters; image features are millimeters
on the image plane, ordered marker-major ``(u_l1, u_r1, v1, u_l2, ...)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .camera import CameraIntrinsics, project, triangulate
from .errors import CoincidentPoints, CollinearPoints, MarkerBehindCamera
from .kinematics import (DEFAULT_GEOMETRY, RobotGeometry, fk_matrix,
                         inverse_kinematics, nearest_branch)
from .se3 import Pose, compose, inverse, rigid_register

FD_STEP = 1e-6  # rad
MM_PER_M = 1000.0

DEFAULT_MARKERS = ((-0.5, 0.0, 0.0), (0.0, 0.0, 0.5), (2.0, -2.0, 0.0))

# Camera axes expressed in the tool frame: X_c = s, Y_c = a, Z_c = n, so the
# optical axis is the tool n-axis (pointing down at the zero configuration).
CAMERA_FROM_TOOL = np.array([[0.0, 1.0, 0.0],
                             [0.0, 0.0, 1.0],
                             [1.0, 0.0, 0.0]])
DEFAULT_T_EC = Pose(CAMERA_FROM_TOOL, np.zeros(3))


@dataclass(frozen=True, eq=False)
class MarkerSet:
    points: np.ndarray = field(default_factory=lambda: np.array(DEFAULT_MARKERS))

    def __post_init__(self):
        P = np.array(self.points, dtype=float).reshape(3, 3)
        n = np.cross(P[1] - P[0], P[2] - P[0])
        scale = max(np.linalg.norm(P[1] - P[0]) * np.linalg.norm(P[2] - P[0]), 1e-300)
        if np.linalg.norm(n) <= 1e-12 * scale:
            raise CollinearPoints("marker set is collinear")
        P.setflags(write=False)
        object.__setattr__(self, "points", P)

    @property
    def normal(self) -> np.ndarray:
        P = self.points
        n = np.cross(P[1] - P[0], P[2] - P[0])
        return n / np.linalg.norm(n)


@dataclass(frozen=True)
class EihParameters:
    intr: CameraIntrinsics = field(default_factory=CameraIntrinsics)
    geom: RobotGeometry = DEFAULT_GEOMETRY
    t_ec: Pose = DEFAULT_T_EC

    def __post_init__(self):
        if not self.t_ec.is_valid():
            raise ValueError("t_ec must be a proper rigid transform")


def _points(markers) -> np.ndarray:
    if isinstance(markers, MarkerSet):
        return markers.points
    return np.asarray(markers, dtype=float).reshape(-1, 3)


def base_to_camera(params: EihParameters, q) -> Pose:
    """``T_O^C = T_E^C * (T_6^0)^-1``: maps base-frame points into {C}."""
    return compose(params.t_ec, inverse(Pose.from_matrix(fk_matrix(params.geom, q))))


def camera_pose(params: EihParameters, q) -> Pose:
    """Pose of the camera frame in {O}."""
    return inverse(base_to_camera(params, q))


def robot_to_camera(params: EihParameters, q, p) -> np.ndarray:
    """Base-frame point(s) in meters -> camera-frame point(s) in meters."""
    T = fk_matrix(params.geom, q)
    R, t = T[:3, :3], T[:3, 3]
    p_e = (np.asarray(p, dtype=float) - t) @ R  # R^T (p - t)
    return p_e @ params.t_ec.rotation.T + params.t_ec.translation


def eih_map(params: EihParameters, q, markers=None) -> np.ndarray:
    P = _points(markers if markers is not None else MarkerSet())
    pc = robot_to_camera(params, q, P) * MM_PER_M
    for i, z in enumerate(pc[:, 2]):
        if z <= 0:
            raise MarkerBehindCamera(i + 1, z)
    return project(params.intr, pc).reshape(-1)


def eih_jacobian(params: EihParameters, q, markers=None, h: float = FD_STEP) -> np.ndarray:
    """Central-difference Jacobian of :func:`eih_map`, shape (9, 6), mm/rad."""
    q = np.asarray(q, dtype=float)
    P = _points(markers if markers is not None else MarkerSet())
    J = np.empty((3 * len(P), 6))
    for j in range(6):
        dq = np.zeros(6)
        dq[j] = h
        J[:, j] = (eih_map(params, q + dq, P) - eih_map(params, q - dq, P)) / (2 * h)
    return J


def pose_from_features(intr: CameraIntrinsics, f, markers=None) -> Pose:
    """Camera pose in {O} from nine stereo features of three known markers.

    Each marker is triangulated into {C}; registering the base-frame marker
    coordinates onto the triangulated ones yields ``T_O^C``, whose inverse is
    the camera pose.
    """
    P = _points(markers if markers is not None else MarkerSet())
    pc = triangulate(intr, np.asarray(f, dtype=float).reshape(-1, 3)) / MM_PER_M
    return inverse(rigid_register(P, pc))


def estimate_joints(params: EihParameters, f, markers=None, near=None,
                    strict: bool = False) -> np.ndarray:
    """Joint angles whose eye-in-hand image matches ``f``.

    With ``near`` the wrist branch and 2*pi wraps closest to that
    configuration are returned instead of the principal IK branch.
    """
    cam = pose_from_features(params.intr, f, markers)
    tool = compose(cam, params.t_ec)
    if near is None:
        return inverse_kinematics(params.geom, tool, strict=strict)
    q = inverse_kinematics(params.geom, tool, strict=strict, q4_hint=float(near[3]))
    return nearest_branch(q, near)


def p2p_pose_family(p1, p2, angle: float) -> Pose:
    """Member of the one-parameter family of camera poses that see two points
    at unchanged camera-frame coordinates.

    Coordinates are those of the original camera frame.  The camera is swung
    about the line through ``p1`` and ``p2``, so its origin travels on a circle
    whose center is the foot of the perpendicular from the origin to that line
    and whose radius is the height of the triangle (origin, p1, p2).
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    axis = p2 - p1
    length = np.linalg.norm(axis)
    if length < 1e-12:
        raise CoincidentPoints("p1 and p2 coincide")
    k = axis / length
    K = np.array([[0.0, -k[2], k[1]], [k[2], 0.0, -k[0]], [-k[1], k[0], 0.0]])
    R = np.eye(3) + np.sin(angle) * K + (1.0 - np.cos(angle)) * (K @ K)
    return Pose(R, p1 - R @ p1)


def p2p_circle(p1, p2):
    """Center and radius of the origin circle traced by :func:`p2p_pose_family`."""
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    k = (p2 - p1) / np.linalg.norm(p2 - p1)
    center = p1 - (p1 @ k) * k
    return center, float(np.linalg.norm(center))
