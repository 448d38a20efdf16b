"""Quick self-checks runnable from the command line (``servo-forge check``)."""

from __future__ import annotations

import math
from typing import Callable, Dict, List, NamedTuple

import numpy as np

from .camera import CameraIntrinsics, project, triangulate
from .eye_in_hand import EihParameters, eih_map, estimate_joints
from .kinematics import (DEFAULT_GEOMETRY, forward_kinematics, inverse_kinematics,
                         sample_safe_joints)
from .lti import RationalTF, realize_discrete
from .se3 import Pose, rigid_register, rot_z
from .sim import InnerLoops
from .youla import (ControllerGains, inner_closed_loop, synthesize_feedforward,
                    synthesize_inner)


class CheckResult(NamedTuple):
    name: str
    ok: bool
    detail: str


def _home_pose() -> CheckResult:
    T = forward_kinematics(DEFAULT_GEOMETRY, np.zeros(6)).matrix
    ref = np.array([[0, 0, 1, 1.27], [0, 1, 0, 0], [-1, 0, 0, 1.57], [0, 0, 0, 1]], float)
    err = float(np.abs(T - ref).max())
    return CheckResult("home pose matches the tabulated camera pose", err < 1e-9, f"max err {err:.2e}")


def _ik_roundtrip(n: int = 200) -> CheckResult:
    worst = 0.0
    for q in sample_safe_joints(DEFAULT_GEOMETRY, np.random.default_rng(0), n):
        q_back = inverse_kinematics(DEFAULT_GEOMETRY, forward_kinematics(DEFAULT_GEOMETRY, q))
        worst = max(worst, float(np.abs(q_back - q).max()))
    return CheckResult(f"IK(FK(q)) = q on {n} configurations", worst < 1e-6, f"max err {worst:.2e} rad")


def _stereo_roundtrip(n: int = 10000) -> CheckResult:
    rng = np.random.default_rng(1)
    intr = CameraIntrinsics()
    P = np.column_stack([rng.uniform(-2000, 2000, n), rng.uniform(-2000, 2000, n),
                         rng.uniform(500, 25000, n)])
    rel = np.linalg.norm(triangulate(intr, project(intr, P)) - P, axis=1) / np.linalg.norm(P, axis=1)
    return CheckResult(f"triangulate(project(P)) = P on {n} points", rel.max() < 1e-9,
                       f"max rel err {rel.max():.2e}")


def _pose_recovery() -> CheckResult:
    params = EihParameters()
    q = np.radians([42.40, 21.20, 4.58, -2.86, 66.46, -42.40])
    err = float(np.abs(estimate_joints(params, eih_map(params, q)) - q).max())
    return CheckResult("joints recovered from nine stereo features", err < 1e-6, f"max err {err:.2e} rad")


def _registration() -> CheckResult:
    src = np.eye(3)
    T = Pose(rot_z(math.pi / 2), [1.0, 0.0, 0.0])
    got = rigid_register(src, src @ T.rotation.T + T.translation)
    err = float(np.abs(got.matrix - T.matrix).max())
    return CheckResult("rigid registration recovers a known transform", err < 1e-9, f"max err {err:.2e}")


def _interpolation() -> CheckResult:
    T = inner_closed_loop(0.01)
    h = 1e-6
    slope = abs(complex(T(h) - T(-h))) / (2 * h)
    ok = T.num[0] == T.den[0] and T.num[1] == T.den[1]
    return CheckResult("inner loop T(0) = 1 and T'(0) = 0", ok and slope < 1e-6,
                       f"T(0) = {T.dcgain():.12g}, |T'(0)| ~ {slope:.1e}")


def _inner_equivalence() -> CheckResult:
    gains = ControllerGains()
    dt, n = 1e-4, 10001
    loops = InnerLoops(gains, dt)
    ref = realize_discrete(synthesize_inner(gains).T, dt)
    ref.reset(1)
    worst = 0.0
    for _ in range(n):
        y = loops.step(np.ones(6))[0]
        worst = max(worst, abs(y - ref.step([1.0])[0]))
    return CheckResult("{Gc, 1/s^2} loop reproduces T step response", worst < 1e-6, f"max diff {worst:.2e}")


def _feedforward() -> CheckResult:
    gains = ControllerGains()
    cascade = synthesize_feedforward(gains) * synthesize_inner(gains).T
    tf = gains.tau_forward
    target = RationalTF([1.0], [1.0, 2 * tf, tf * tf])
    ok = cascade.cancel([1.0, 3 * gains.tau_in]).cancel(
        [1.0, 3 * gains.tau_in, 3 * gains.tau_in ** 2, gains.tau_in ** 3]).same_as(target)
    return CheckResult("feedforward * inner loop = 1/(tau_f s + 1)^2", ok, "coefficient-wise")


SUITES: Dict[str, List[Callable[[], CheckResult]]] = {
    "kinematics": [_home_pose, _ik_roundtrip, _pose_recovery],
    "camera": [_stereo_roundtrip, _registration],
    "control": [_interpolation, _inner_equivalence, _feedforward],
}


def run_suite(name: str) -> List[CheckResult]:
    names = list(SUITES) if name == "all" else [name]
    out = []
    for suite in names:
        for check in SUITES[suite]:
            try:
                out.append(check())
            except Exception as exc:  # a crashing check is a failed check
                out.append(CheckResult(check.__name__.strip("_"), False, f"raised {exc!r}"))
    return out
