"""Fixed-step closed-loop simulation of the feedforward + adaptive Youla servo.

Every block runs in deviation coordinates around the start configuration
``q0``; the feedforward path filters the joint step ``q* - q0``.  Per sample:

1. measure features at the current joints (one-sample measurement delay);
2. feature error ``e = p_target - p``;
3. outer controller maps ``e`` to the joint correction ``q_fb``;
4. feedforward filter output ``q_ff`` (held at ``q0`` in feedback-only mode);
5. ``q_ref = q_ff + q_fb``;
6. six inner loops ``{Gc, 1/s^2}`` advance one sample;
7. joints seen by the camera are the inner-loop output plus the disturbance;
8. every ``adaptive_period`` the Jacobian is re-evaluated at the joints
   estimated from the image and the outer design is updated.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (RankDeficient, ServoError, SimDiverged, TargetUnreachable)
from .eye_in_hand import (EihParameters, MarkerSet, eih_jacobian, eih_map,
                          estimate_joints)
from .kinematics import forward_kinematics, inverse_kinematics, nearest_branch
from .lti import realize_discrete
from .se3 import Pose
from .youla import (ControllerGains, OuterController, synthesize_feedforward,
                    synthesize_inner, synthesize_outer)

log = logging.getLogger(__name__)

FEEDBACK_ONLY = "feedback_only"
FEEDFORWARD_FEEDBACK = "feedforward_feedback"
MODE_ALIASES = {"fb": FEEDBACK_ONLY, FEEDBACK_ONLY: FEEDBACK_ONLY,
                "ff+fb": FEEDFORWARD_FEEDBACK, FEEDFORWARD_FEEDBACK: FEEDFORWARD_FEEDBACK}
RUNAWAY = 10 * math.pi


def normalize_mode(mode: str) -> str:
    try:
        return MODE_ALIASES[mode]
    except KeyError:
        raise ValueError(f"unknown mode {mode!r}; use 'fb' or 'ff+fb'") from None


@dataclass(frozen=True, eq=False)
class Disturbance:
    amplitude: np.ndarray = field(default_factory=lambda: np.zeros(6))  # rad
    onset: float = 0.0  # s

    def __post_init__(self):
        a = np.broadcast_to(np.asarray(self.amplitude, dtype=float), (6,)).copy()
        object.__setattr__(self, "amplitude", a)

    def at(self, t: float) -> np.ndarray:
        return self.amplitude if t >= self.onset else np.zeros(6)


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    initial_joints: np.ndarray
    target_pose: Optional[Pose] = None
    target_joints: Optional[np.ndarray] = None
    markers: MarkerSet = field(default_factory=MarkerSet)
    gains: ControllerGains = field(default_factory=ControllerGains)
    disturbance: Disturbance = field(default_factory=Disturbance)
    mode: str = FEEDFORWARD_FEEDBACK
    duration: float = 5.0
    dt: float = 1e-4
    adaptive_period: float = 0.01
    settle_tol: float = 1e-3  # mm
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "initial_joints",
                           np.asarray(self.initial_joints, dtype=float).reshape(6))
        if self.target_joints is not None:
            object.__setattr__(self, "target_joints",
                               np.asarray(self.target_joints, dtype=float).reshape(6))
        if self.target_pose is None and self.target_joints is None:
            raise ValueError("either target_pose or target_joints is required")
        object.__setattr__(self, "mode", normalize_mode(self.mode))
        if not self.duration > 0:
            raise ValueError("duration must be positive")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.adaptive_period < self.dt:
            raise ValueError("adaptive_period must be at least dt")

    @property
    def steps(self) -> int:
        return int(round(self.duration / self.dt))


@dataclass(eq=False)
class RunLog:
    t: np.ndarray
    q: np.ndarray
    q_ref: np.ndarray
    q_feedback: np.ndarray
    q_feedforward: np.ndarray
    features: np.ndarray
    feature_targets: np.ndarray
    feature_error: np.ndarray
    projected_error: np.ndarray  # U6^T e with the design active at each sample

    def __len__(self):
        return len(self.t)


@dataclass
class RunSummary:
    mode: str
    settling_time: float
    settling_time_all_nine: float
    settling_time_projected: float
    final_feature_residuals: list
    final_joint_error: list
    converged_all_nine: bool
    projected_settled: bool
    projected_error_final: list
    max_abs_residual: float
    point3_max_residual: float
    settle_tol: float

    @property
    def converged(self) -> bool:
        """Mode-appropriate success: all nine features with feedforward,
        the six controllable channels without it."""
        if self.mode == FEEDFORWARD_FEEDBACK:
            return self.converged_all_nine
        return self.projected_settled

    def to_dict(self) -> dict:
        out = dict(self.__dict__)
        for k in ("settling_time", "settling_time_all_nine", "settling_time_projected"):
            if math.isinf(out[k]):
                out[k] = None
        out["converged"] = self.converged
        return out


def settling_time(t, error, tolerance: float) -> float:
    """First time after which every column of ``error`` stays within ``tolerance``.

    Returns ``inf`` when the final sample is still outside.
    """
    t = np.asarray(t, dtype=float)
    e = np.abs(np.asarray(error, dtype=float))
    if e.ndim == 1:
        e = e[:, None]
    outside = np.flatnonzero(np.any(e > tolerance, axis=1))
    if len(outside) == 0:
        return float(t[0]) if len(t) else 0.0
    last = outside[-1]
    if last == len(t) - 1:
        return math.inf
    return float(t[last + 1])


class InnerLoops:
    """Six identical Tustin-discretized ``{Gc, 1/s^2}`` loops, solved exactly
    (the algebraic loop through the direct feedthroughs is closed per step)."""

    def __init__(self, gains: ControllerGains, dt: float):
        design = synthesize_inner(gains)
        self.gc = realize_discrete(design.Gc, dt)
        self.plant = realize_discrete(design.Gp, dt)
        self.gc.reset(6)
        self.plant.reset(6)
        self._den = 1.0 + self.gc.D * self.plant.D

    def step(self, r) -> np.ndarray:
        yp0 = self.plant.C @ self.plant.x
        u = (self.gc.C @ self.gc.x + self.gc.D * (r - yp0)) / self._den
        y = yp0 + self.plant.D * u
        self.gc.advance(r - y)
        self.plant.advance(u)
        return y


def _target_joints(cfg: ScenarioConfig, params: EihParameters) -> np.ndarray:
    try:
        if cfg.target_pose is not None:
            q = inverse_kinematics(params.geom, cfg.target_pose)
        else:
            pose = forward_kinematics(params.geom, cfg.target_joints)
            q = nearest_branch(inverse_kinematics(params.geom, pose,
                                                  q4_hint=cfg.target_joints[3]),
                               cfg.target_joints)
    except ServoError as exc:
        raise TargetUnreachable(str(exc)) from exc
    return q


def _initial_design(cfg, params, q_est, q_target):
    for q in (q_est, q_target):
        try:
            return synthesize_outer(eih_jacobian(params, q, cfg.markers), cfg.gains)
        except RankDeficient:
            log.info("Jacobian rank deficient at %s; trying next linearization point", q)
    raise RankDeficient("no full-rank linearization point for the outer loop")


def run_scenario(cfg: ScenarioConfig, params: Optional[EihParameters] = None):
    params = params or EihParameters()
    markers = cfg.markers
    dt, n = cfg.dt, cfg.steps
    q0 = cfg.initial_joints
    q_star = _target_joints(cfg, params)
    try:
        target = eih_map(params, q_star, markers)
    except ServoError as exc:
        raise TargetUnreachable(f"target image undefined: {exc}") from exc

    feedforward = cfg.mode == FEEDFORWARD_FEEDBACK
    ff = realize_discrete(synthesize_feedforward(cfg.gains), dt)
    ff.reset(6)
    ff_step = q_star - q0
    inner = InnerLoops(cfg.gains, dt)

    features0 = eih_map(params, q0 + cfg.disturbance.at(0.0), markers)
    q_est = estimate_joints(params, features0, markers, near=q0)
    outer = OuterController(_initial_design(cfg, params, q_est, q_star), dt)
    every = max(1, int(round(cfg.adaptive_period / dt)))

    rows = n + 1
    t = np.arange(rows) * dt
    log_q = np.empty((rows, 6))
    log_ref = np.empty((rows, 6))
    log_fb = np.empty((rows, 6))
    log_ff = np.empty((rows, 6))
    log_f = np.empty((rows, 9))
    log_p = np.empty((rows, 6))

    y = np.zeros(6)
    for k in range(rows):
        q = q0 + y + cfg.disturbance.at(t[k])
        if not np.all(np.abs(q) < RUNAWAY):
            raise SimDiverged(f"joint runaway at t = {t[k]:.4f} s: {q}")
        try:
            f = eih_map(params, q, markers)
        except ServoError as exc:
            raise SimDiverged(f"image lost at t = {t[k]:.4f} s: {exc}") from exc
        e = target - f

        if k % every == 0 and k > 0:
            try:
                q_est = estimate_joints(params, f, markers, near=q_est)
                outer.update(eih_jacobian(params, q_est, markers))
            except RankDeficient:
                log.debug("rank-deficient Jacobian at t = %.4f s; keeping design", t[k])
            except ServoError as exc:
                log.debug("joint estimate failed at t = %.4f s: %s", t[k], exc)

        q_fb = outer.step(e)
        q_ff = q0 + (ff.step(ff_step) if feedforward else 0.0)
        q_ref = q_ff + q_fb
        log_q[k] = q
        log_ref[k] = q_ref
        log_fb[k] = q_fb
        log_ff[k] = q_ff
        log_f[k] = f
        log_p[k] = outer.synth.U6.T @ e
        y = inner.step(q_ref - q0)

    targets = np.broadcast_to(target, (rows, 9)).copy()
    run = RunLog(t=t, q=log_q, q_ref=log_ref, q_feedback=log_fb, q_feedforward=log_ff,
                 features=log_f, feature_targets=targets, feature_error=targets - log_f,
                 projected_error=log_p)
    return run, summarize(run, cfg, q_star, outer.synth.U6)


def summarize(run: RunLog, cfg: ScenarioConfig, q_star, U6) -> RunSummary:
    tol = cfg.settle_tol
    e_final = run.feature_error[-1]
    proj_final = U6.T @ e_final
    ts9 = settling_time(run.t, run.feature_error, tol)
    tsp = settling_time(run.t, run.projected_error, tol)
    all9 = bool(np.max(np.abs(e_final)) < tol)
    proj_ok = bool(np.max(np.abs(proj_final)) < tol and math.isfinite(tsp))
    primary = ts9 if cfg.mode == FEEDFORWARD_FEEDBACK else tsp
    return RunSummary(
        mode=cfg.mode,
        settling_time=primary,
        settling_time_all_nine=ts9,
        settling_time_projected=tsp,
        final_feature_residuals=e_final.tolist(),
        final_joint_error=(run.q[-1] - q_star).tolist(),
        converged_all_nine=all9,
        projected_settled=proj_ok,
        projected_error_final=proj_final.tolist(),
        max_abs_residual=float(np.max(np.abs(e_final))),
        point3_max_residual=float(np.max(np.abs(e_final[6:9]))),
        settle_tol=tol,
    )


def builtin_scenario(name: str, mode: str = FEEDFORWARD_FEEDBACK, **overrides) -> ScenarioConfig:
    """The two demonstration maneuvers (joint values in degrees as tabulated)."""
    d = np.radians
    if name == "scenario1":
        base = dict(initial_joints=np.zeros(6),
                    target_joints=d([0.48, 2.21, 2.05, -82.68, 9.46, 77.47]))
    elif name == "scenario2":
        base = dict(initial_joints=d([42.40, 21.20, 4.58, -2.86, 66.46, -42.40]),
                    target_joints=d([45.0, 18.59, 4.35, 0.0, 67.06, -45.0]),
                    disturbance=Disturbance(np.full(6, math.radians(1.0)), 0.0))
    else:
        raise KeyError(f"unknown builtin scenario {name!r}")
    base.update(name=name, mode=mode)
    base.update(overrides)
    return ScenarioConfig(**base)
