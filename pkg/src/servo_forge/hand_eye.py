"""Marker frames, marker-to-camera registration and hand-eye motion pairs.

The hand-eye equation itself is not solved here; this module builds and checks
the data an ``AX = XB`` solver would consume.

Conventions: ``t06`` is the tool pose in the base frame (the DH chain product,
mapping tool coordinates to base coordinates) and ``tmc`` maps marker-frame
coordinates into the camera frame.  With relative motions

    A = t06_i^-1 * t06_j        (tool j -> tool i)
    B = tmc_i * tmc_j^-1        (camera j -> camera i)

the pair satisfies ``A X = X B`` where ``X`` is the camera pose in the tool
frame, i.e. ``inverse(t_ec)`` for the ``t_ec`` of :class:`EihParameters`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera import CameraIntrinsics, project, triangulate
from .errors import CollinearPoints
from .eye_in_hand import MM_PER_M
from .se3 import Pose, compose, inverse, rigid_register, rotation_angle

COLLINEAR_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class MarkerFrame:
    origin: np.ndarray
    axes: np.ndarray  # columns X, Y, Z

    @property
    def pose(self) -> Pose:
        """Marker frame -> frame the points were given in."""
        return Pose(self.axes, self.origin)

    def local(self, points) -> np.ndarray:
        """Express points (given in the parent frame) in marker coordinates."""
        return (np.asarray(points, dtype=float) - self.origin) @ self.axes


def build_marker_frame(p1, p2, p3, camera=None) -> MarkerFrame:
    """Origin at ``p1``, X toward ``p2``, Z normal to the marker plane.

    ``camera`` is the camera position in the same frame as the points; when
    given, Z is flipped so it faces the camera.  Otherwise Z follows the
    right-hand rule ``(p2 - p1) x (p3 - p1)``.
    """
    p1, p2, p3 = (np.asarray(p, dtype=float) for p in (p1, p2, p3))
    e1, e2 = p2 - p1, p3 - p1
    n = np.cross(e1, e2)
    scale = np.linalg.norm(e1) * np.linalg.norm(e2)
    if scale == 0.0 or np.linalg.norm(n) <= COLLINEAR_RTOL * scale:
        raise CollinearPoints("marker points are collinear")
    x = e1 / np.linalg.norm(e1)
    z = n / np.linalg.norm(n)
    if camera is not None:
        centroid = (p1 + p2 + p3) / 3.0
        if z @ (np.asarray(camera, dtype=float) - centroid) < 0:
            z = -z
    y = np.cross(z, x)
    return MarkerFrame(origin=p1, axes=np.column_stack([x, y, z]))


def marker_to_camera(intr: CameraIntrinsics, features, marker_local) -> Pose:
    """``T_M^C`` from stereo features of three or more markers.

    ``marker_local`` holds marker positions in {M} (meters); features are
    marker-major ``(u_l, u_r, v)`` triplets in millimeters.
    """
    pc = triangulate(intr, np.asarray(features, dtype=float).reshape(-1, 3)) / MM_PER_M
    return rigid_register(np.asarray(marker_local, dtype=float).reshape(-1, 3), pc)


@dataclass(frozen=True, eq=False)
class MotionPair:
    A: Pose
    B: Pose

    def residual(self, X: Pose) -> float:
        """Frobenius norm of ``A X - X B``."""
        return float(np.linalg.norm(compose(self.A, X).matrix - compose(X, self.B).matrix))

    def angle_gap(self) -> float:
        return abs(rotation_angle(self.A.rotation) - rotation_angle(self.B.rotation))


def motion_pair(t06_i: Pose, t06_j: Pose, tmc_i: Pose, tmc_j: Pose) -> MotionPair:
    return MotionPair(A=compose(inverse(t06_i), t06_j),
                      B=compose(tmc_i, inverse(tmc_j)))


def camera_in_tool(t_ec: Pose) -> Pose:
    """The ``X`` of ``A X = X B`` for a given end-effector -> camera map."""
    return inverse(t_ec)


def synthesize_tmc(tool_pose: Pose, t_ec: Pose, marker_pose: Pose) -> Pose:
    """Ground-truth ``T_M^C`` for a tool pose in {O} and a marker frame in {O}."""
    base_to_camera = compose(t_ec, inverse(tool_pose))
    return compose(base_to_camera, marker_pose)


def features_from_tmc(intr: CameraIntrinsics, tmc: Pose, marker_local) -> np.ndarray:
    """Stereo features of markers given in {M}, seen through ``tmc``."""
    pts = np.asarray(marker_local, dtype=float).reshape(-1, 3)
    pc = pts @ tmc.rotation.T + tmc.translation
    return project(intr, pc * MM_PER_M).reshape(-1)
