"""DH kinematics of the 6-axis elbow manipulator (ABB IRB 4600-45/2.05).

Frame conventions at the zero configuration: base Z up, link 2 vertical, the
L3 offset vertical, the L4 forearm and the tool along base +X.  The tool frame
then has ``n = (0, 0, -1)``, ``s = (0, 1, 0)``, ``a = (1, 0, 0)`` and sits at
``(a1 + L4 + Lt, 0, L1 + L2 + L3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional, Sequence, Tuple

import numpy as np

from .errors import SingularWrist, Unreachable
from .se3 import Pose

ACOS_SLACK = 1e-12
WRIST_SINGULAR_TOL = 1e-9


@dataclass(frozen=True)
class DHRow:
    a: float
    alpha: float
    d: float
    theta_offset: float = 0.0

    def __post_init__(self):
        vals = (self.a, self.alpha, self.d, self.theta_offset)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("DH parameters must be finite")
        if not -math.pi < self.alpha <= math.pi:
            raise ValueError("alpha must lie in (-pi, pi]")


# degrees, (min, max) per axis
IRB4600_LIMITS_DEG = (
    (-180.0, 180.0),
    (-90.0, 150.0),
    (-180.0, 75.0),
    (-400.0, 400.0),
    (-125.0, 120.0),
    (-400.0, 400.0),
)


def _dh_table(L1, L2, L3, L4, a1, Lt) -> Tuple[DHRow, ...]:
    h = math.pi / 2
    return (
        DHRow(a1, -h, L1, 0.0),
        DHRow(L2, 0.0, 0.0, -h),
        DHRow(L3, -h, 0.0, 0.0),
        DHRow(0.0, h, L4, 0.0),
        DHRow(0.0, -h, 0.0, 0.0),
        DHRow(0.0, 0.0, Lt, math.pi),
    )


@dataclass(frozen=True)
class RobotGeometry:
    """Link lengths in meters and joint limits in radians.

    ``dh`` is derived from the lengths unless given explicitly.  The closed-form
    inverse assumes the derived table, so a custom ``dh`` only affects FK.
    """

    L1: float = 0.495
    L2: float = 0.900
    L3: float = 0.175
    L4: float = 0.960
    a1: float = 0.175
    Lt: float = 0.135
    joint_limits: Tuple[Tuple[float, float], ...] = tuple(
        (math.radians(lo), math.radians(hi)) for lo, hi in IRB4600_LIMITS_DEG)
    dh: Optional[Tuple[DHRow, ...]] = None

    def __post_init__(self):
        for name in ("L1", "L2", "L3", "L4", "a1", "Lt"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        limits = tuple((float(lo), float(hi)) for lo, hi in self.joint_limits)
        if len(limits) != 6 or any(lo > hi for lo, hi in limits):
            raise ValueError("joint_limits must be six (min, max) pairs")
        object.__setattr__(self, "joint_limits", limits)
        if self.dh is None:
            object.__setattr__(
                self, "dh", _dh_table(self.L1, self.L2, self.L3, self.L4, self.a1, self.Lt))
        elif len(self.dh) != 6:
            raise ValueError("dh must have six rows")

    @property
    def forearm(self) -> float:
        """Elbow-to-wrist distance sqrt(L3^2 + L4^2)."""
        return math.hypot(self.L3, self.L4)

    @property
    def max_reach(self) -> float:
        return self.L2 + self.forearm


DEFAULT_GEOMETRY = RobotGeometry()


def dh_transform(row: DHRow, q: float) -> Pose:
    return Pose.from_matrix(_dh_matrix(row, q))


def _dh_matrix(row: DHRow, q: float) -> np.ndarray:
    th = q + row.theta_offset
    c, s = math.cos(th), math.sin(th)
    ca, sa = math.cos(row.alpha), math.sin(row.alpha)
    return np.array([
        [c, -s * ca, s * sa, row.a * c],
        [s, c * ca, -c * sa, row.a * s],
        [0.0, sa, ca, row.d],
        [0.0, 0.0, 0.0, 1.0],
    ])


def fk_matrix(geom: RobotGeometry, q) -> np.ndarray:
    """4x4 base-to-tool transform ``T_6^0`` as a plain array."""
    T = _dh_matrix(geom.dh[0], q[0])
    for row, qi in zip(geom.dh[1:], q[1:]):
        T = T @ _dh_matrix(row, qi)
    return T


def forward_kinematics(geom: RobotGeometry, q) -> Pose:
    q = np.asarray(q, dtype=float)
    if q.shape != (6,):
        raise ValueError("q must have six joint angles")
    return Pose.from_matrix(fk_matrix(geom, q))


def wrist_center(geom: RobotGeometry, pose: Pose) -> np.ndarray:
    return pose.translation - geom.Lt * pose.a


def _safe_acos(x: float, what: str) -> float:
    if abs(x) > 1.0 + ACOS_SLACK:
        raise Unreachable(f"{what}: arccos argument {x:.12g} outside [-1, 1]")
    return math.acos(max(-1.0, min(1.0, x)))


def inverse_kinematics(geom: RobotGeometry, pose: Pose, *, strict: bool = False,
                       q4_hint: float = 0.0) -> np.ndarray:
    """Closed-form elbow-up inverse kinematics.

    Wrist-center decoupling: ``p = d - Lt*a`` gives q1..q3, the tool
    orientation relative to the forearm gives q4..q6 with ``q5 in [0, pi]``.
    At the wrist singularity (``sin q5 ~ 0``) only ``q4 + q6`` is observable;
    the split puts ``q4 = q4_hint`` unless ``strict`` asks for
    :class:`SingularWrist` instead.
    """
    L1, L2, a1 = geom.L1, geom.L2, geom.a1
    L34 = geom.forearm
    phi = math.atan2(geom.L4, geom.L3)

    px, py, pz = wrist_center(geom, pose)
    q1 = math.atan2(py, px)
    r = math.hypot(px, py) - a1
    z = pz - L1
    D2 = r * r + z * z
    D = math.sqrt(D2)
    if D > geom.max_reach * (1 + ACOS_SLACK) or D == 0.0:
        raise Unreachable(f"wrist center at distance {D:.6g} m is outside the reach")

    q3 = math.pi - _safe_acos((L2 * L2 + L34 * L34 - D2) / (2 * L2 * L34), "elbow") - phi
    q2 = (math.pi / 2 - _safe_acos((L2 * L2 + D2 - L34 * L34) / (2 * L2 * D), "shoulder")
          - math.atan2(z, r))

    c1, s1 = math.cos(q1), math.sin(q1)
    c23, s23 = math.cos(q2 + q3), math.sin(q2 + q3)
    fore = np.array([c1 * c23, s1 * c23, -s23])
    side = np.array([-s1, c1, 0.0])
    up = np.array([c1 * s23, s1 * s23, c23])

    n, s, a = pose.n, pose.s, pose.a
    ya, za = side @ a, up @ a
    s5 = math.hypot(ya, za)
    q5 = math.atan2(s5, fore @ a)
    if s5 < WRIST_SINGULAR_TOL:
        if strict:
            raise SingularWrist("sin(q5) ~ 0: q4 and q6 are not separable")
        q46 = math.atan2(side @ n, -(up @ n))
        q4 = q4_hint
        q6 = _wrap(q46 - q4)
    else:
        q4 = math.atan2(ya, -za)
        q6 = math.atan2(fore @ s, -(fore @ n))
    return np.array([q1, q2, q3, q4, q5, q6])


def nearest_branch(q, ref) -> np.ndarray:
    """Among the wrist-flip twin and 2*pi shifts of ``q``, the one closest to ``ref``.

    ``(q4, q5, q6)`` and ``(q4 + pi, -q5, q6 + pi)`` give the same tool pose.
    """
    q = np.asarray(q, dtype=float)
    ref = np.asarray(ref, dtype=float)
    flip = q.copy()
    flip[3] += math.pi
    flip[4] = -flip[4]
    flip[5] += math.pi
    best = None
    for cand in (q, flip):
        c = cand.copy()
        c[[0, 3, 5]] = ref[[0, 3, 5]] + wrap_angles(c[[0, 3, 5]] - ref[[0, 3, 5]])
        cost = float(np.sum((c - ref) ** 2))
        if best is None or cost < best[0]:
            best = (cost, c)
    return best[1]


def principal_domain(geom: RobotGeometry, q, margin: float = math.radians(5.0),
                     q5_range=(math.radians(5.0), math.radians(115.0))) -> bool:
    """True where the closed-form inverse returns ``q`` itself.

    That is: limits shrunk by ``margin``, ``q4`` and ``q6`` inside their
    principal range, ``q5`` inside ``q5_range`` (positive, away from the wrist
    singularity), the elbow on the branch ``q3 > -atan2(L4, L3)`` and the
    wrist center ahead of axis 1.
    """
    q = np.asarray(q, dtype=float)
    for qi, (lo, hi) in zip(q, geom.joint_limits):
        if not lo + margin <= qi <= hi - margin:
            return False
    if not (-math.pi + margin <= q[3] <= math.pi - margin
            and -math.pi + margin <= q[5] <= math.pi - margin):
        return False
    if not q5_range[0] <= q[4] <= q5_range[1]:
        return False
    if q[2] < -math.atan2(geom.L4, geom.L3) + margin:
        return False
    p = wrist_center(geom, Pose.from_matrix(fk_matrix(geom, q)))
    reach = p[0] * math.cos(q[0]) + p[1] * math.sin(q[0]) - geom.a1
    return reach > 0.05


def sample_safe_joints(geom: RobotGeometry, rng, n: int, **kw) -> np.ndarray:
    """``n`` uniform draws from the joint box restricted to :func:`principal_domain`."""
    lo = np.array([max(l, -math.pi) for l, _ in geom.joint_limits])
    hi = np.array([min(h, math.pi) for _, h in geom.joint_limits])
    out = []
    while len(out) < n:
        q = rng.uniform(lo, hi)
        if principal_domain(geom, q, **kw):
            out.append(q)
    return np.array(out)


def _wrap(angle: float) -> float:
    return (angle + math.pi) % (2 * math.pi) - math.pi


def wrap_angles(q) -> np.ndarray:
    """Wrap to [-pi, pi)."""
    q = np.asarray(q, dtype=float)
    return (q + np.pi) % (2 * np.pi) - np.pi


class LimitViolation(NamedTuple):
    axis: int  # 1-based
    value: float
    lower: float
    upper: float


def check_limits(geom: RobotGeometry, q: Sequence[float]) -> list:
    out = []
    for i, (qi, (lo, hi)) in enumerate(zip(q, geom.joint_limits), start=1):
        if not lo <= qi <= hi:
            out.append(LimitViolation(i, float(qi), lo, hi))
    return out
