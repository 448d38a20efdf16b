"""Rectified stereo camera: projection and triangulation.

The camera frame {C} sits at the middle of the baseline, X along the baseline
toward the right lens, Z along the optical axis.  Image coordinates are kept
in millimeters on the metric image plane (no pixel pitch).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import NonPositiveDepth, ZeroDisparity

log = logging.getLogger(__name__)

EPS_DISPARITY = 1e-12  # mm
DEPTH_RANGE_MM = (500.0, 25000.0)


@dataclass(frozen=True)
class CameraIntrinsics:
    """Focal length and baseline in millimeters (ZED 2 defaults).

    Skew and principal offsets are carried only to make the zero assumption
    explicit; anything else is rejected.
    """

    focal_length: float = 2.8
    baseline: float = 120.0
    skew: float = 0.0
    u0: float = 0.0
    v0: float = 0.0

    def __post_init__(self):
        if not self.focal_length > 0:
            raise ValueError("focal_length must be positive")
        if not self.baseline > 0:
            raise ValueError("baseline must be positive")
        if self.skew != 0 or self.u0 != 0 or self.v0 != 0:
            raise ValueError("only zero skew and zero principal offsets are supported")

    @property
    def K(self) -> np.ndarray:
        F = self.focal_length
        return np.array([[F, self.skew, self.u0], [0.0, F, self.v0], [0.0, 0.0, 1.0]])


def project(intr: CameraIntrinsics, p) -> np.ndarray:
    """Map camera-frame point(s) in mm to ``[u_l, u_r, v]``.

    Accepts shape (3,) or (N, 3); returns the same leading shape.
    """
    P = np.asarray(p, dtype=float)
    X, Y, Z = P[..., 0], P[..., 1], P[..., 2]
    if np.any(Z <= 0):
        raise NonPositiveDepth(f"point depth must be positive, got Z = {np.min(Z):.6g} mm")
    if np.any((Z < DEPTH_RANGE_MM[0]) | (Z > DEPTH_RANGE_MM[1])):
        log.debug("depth outside the rated %s mm range", DEPTH_RANGE_MM)
    F, half_b = intr.focal_length, intr.baseline / 2.0
    u_l = F * (X - half_b) / Z
    u_r = F * (X + half_b) / Z
    v = F * Y / Z
    return np.stack([u_l, u_r, v], axis=-1)


def triangulate(intr: CameraIntrinsics, triplet) -> np.ndarray:
    """Invert :func:`project`: ``[u_l, u_r, v]`` -> camera-frame point in mm."""
    t = np.asarray(triplet, dtype=float)
    u_l, u_r, v = t[..., 0], t[..., 1], t[..., 2]
    disparity = u_r - u_l
    if np.any(np.abs(disparity) < EPS_DISPARITY):
        raise ZeroDisparity("zero disparity: point at infinity")
    b = intr.baseline
    X = b * (u_r + u_l) / (2.0 * disparity)
    Y = b * v / disparity
    Z = intr.focal_length * b / disparity
    return np.stack([X, Y, Z], axis=-1)
