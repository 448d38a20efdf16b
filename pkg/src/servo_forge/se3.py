"""Rigid-body transforms and SVD point-set registration.

A :class:`Pose` ``T_AB`` maps coordinates expressed in frame {B} into frame
{A}: ``p_A = R @ p_B + t``.  Composition follows homogeneous-matrix product
order, so ``compose(T_AB, T_BC) == T_AC``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import CollinearPoints, ReflectionDetected

ORTHO_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class Pose:
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        R = np.array(self.rotation, dtype=float).reshape(3, 3)
        t = np.array(self.translation, dtype=float).reshape(3)
        R.setflags(write=False)
        t.setflags(write=False)
        object.__setattr__(self, "rotation", R)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls()

    @classmethod
    def from_matrix(cls, T) -> "Pose":
        T = np.asarray(T, dtype=float)
        return cls(T[:3, :3], T[:3, 3])

    @classmethod
    def from_translation(cls, xyz) -> "Pose":
        return cls(np.eye(3), xyz)

    @property
    def matrix(self) -> np.ndarray:
        T = np.eye(4)
        T[:3, :3] = self.rotation
        T[:3, 3] = self.translation
        return T

    # n, s, a columns in the robotics naming of a 4x4 pose
    @property
    def n(self) -> np.ndarray:
        return self.rotation[:, 0]

    @property
    def s(self) -> np.ndarray:
        return self.rotation[:, 1]

    @property
    def a(self) -> np.ndarray:
        return self.rotation[:, 2]

    def __matmul__(self, other):
        if isinstance(other, Pose):
            return compose(self, other)
        return transform_point(self, other)

    def inverse(self) -> "Pose":
        return inverse(self)

    def is_valid(self, tol: float = ORTHO_TOL) -> bool:
        R = self.rotation
        return (np.allclose(R.T @ R, np.eye(3), atol=tol)
                and abs(np.linalg.det(R) - 1.0) < tol
                and bool(np.all(np.isfinite(self.translation))))

    def __repr__(self):
        return (f"Pose(rotation={self.rotation.tolist()}, "
                f"translation={self.translation.tolist()})")


def rot_x(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def rot_y(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, 0.0, s], [0.0, 1.0, 0.0], [-s, 0.0, c]])


def rot_z(angle: float) -> np.ndarray:
    c, s = np.cos(angle), np.sin(angle)
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def compose(a: Pose, b: Pose) -> Pose:
    return Pose(a.rotation @ b.rotation, a.rotation @ b.translation + a.translation)


def inverse(p: Pose) -> Pose:
    Rt = p.rotation.T
    return Pose(Rt, -Rt @ p.translation)


def transform_point(p: Pose, pt) -> np.ndarray:
    """Apply ``p`` to a point (shape (3,)) or a stack of points (shape (N, 3))."""
    pt = np.asarray(pt, dtype=float)
    return pt @ p.rotation.T + p.translation


def reorthonormalize(R) -> np.ndarray:
    """Nearest rotation matrix (polar decomposition)."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    D = np.diag([1.0, 1.0, np.sign(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def renormalize(p: Pose, tol: float = ORTHO_TOL) -> Pose:
    """Project the rotation back onto SO(3) if it drifted more than ``tol``."""
    R = p.rotation
    if np.abs(R.T @ R - np.eye(3)).max() <= tol:
        return p
    return Pose(reorthonormalize(R), p.translation)


def rotation_angle(R) -> float:
    """Angle in [0, pi]; atan2 form stays accurate near 0 where arccos does not."""
    R = np.asarray(R, dtype=float)
    w = np.array([R[2, 1] - R[1, 2], R[0, 2] - R[2, 0], R[1, 0] - R[0, 1]])
    return float(np.arctan2(np.linalg.norm(w) / 2.0, (np.trace(R) - 1.0) / 2.0))


def rigid_register(src: Sequence, dst: Sequence, rank_tol: float = 1e-9) -> Pose:
    """Least-squares rigid transform mapping ``src`` onto ``dst``.

    Centers both point sets, builds the cross-covariance ``H = sum src' dst'^T``
    and takes ``R = V U^T`` from ``H = U S V^T``.  A reflection (det = -1) is
    repaired by flipping the singular vector of the smallest singular value.
    The returned pose satisfies ``dst ~= R @ src + t``.
    """
    P = np.asarray(src, dtype=float).reshape(-1, 3)
    Q = np.asarray(dst, dtype=float).reshape(-1, 3)
    if P.shape != Q.shape:
        raise ValueError(f"point sets differ in shape: {P.shape} vs {Q.shape}")
    if len(P) < 3:
        raise ValueError("rigid_register needs at least 3 correspondences")

    p_bar = P.mean(axis=0)
    q_bar = Q.mean(axis=0)
    Pc = P - p_bar
    Qc = Q - q_bar

    sv = np.linalg.svd(Pc, compute_uv=False)
    scale = max(sv[0], 1e-300)
    if sv[1] <= rank_tol * scale or sv[0] == 0.0:
        raise CollinearPoints("source points are collinear (centered rank < 2)")

    H = Pc.T @ Qc
    U, S, Vt = np.linalg.svd(H)
    V = Vt.T
    if np.linalg.det(V @ U.T) < 0.0:
        # Degenerate H for planar sets has a zero last singular value, so the
        # flip picks the proper rotation.  A strictly positive one means the
        # data really is mirrored and no proper rotation fits exactly.
        if S[2] > 1e-6 * S[0] and len(P) > 3:
            raise ReflectionDetected("point sets are related by a reflection")
        V[:, 2] *= -1.0
    R = V @ U.T
    t = q_bar - R @ p_bar
    return Pose(R, t)
