"""JSON scenario files.

Angles are degrees in the file and radians everywhere else; lengths are
meters except the camera intrinsics (millimeters).  Example::

    {
      "name": "demo",
      "mode": "ff+fb",
      "initial_joints": [0, 0, 0, 0, 0, 0],
      "target_joints": [0.48, 2.21, 2.05, -82.68, 9.46, 77.47],
      "disturbance": {"amplitude": 1.0, "onset": 0.0},
      "gains": {"tau_in": 0.01, "omega_n": 10, "zeta": 10},
      "duration": 5.0
    }

``target_pose`` (``{"rotation": 3x3, "translation": [x, y, z]}``) may replace
``target_joints``.  Unknown keys are rejected.
"""

from __future__ import annotations

import json

import jsonschema
import numpy as np

from .camera import CameraIntrinsics
from .eye_in_hand import DEFAULT_T_EC, EihParameters, MarkerSet
from .kinematics import RobotGeometry
from .se3 import Pose
from .sim import MODE_ALIASES, Disturbance, ScenarioConfig
from .youla import ControllerGains


class ConfigError(ValueError):
    pass


_NUM = {"type": "number"}
_POS = {"type": "number", "exclusiveMinimum": 0}
_VEC3 = {"type": "array", "items": _NUM, "minItems": 3, "maxItems": 3}
_VEC6 = {"type": "array", "items": _NUM, "minItems": 6, "maxItems": 6}
_POSE = {
    "type": "object",
    "additionalProperties": False,
    "required": ["rotation", "translation"],
    "properties": {
        "rotation": {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3},
        "translation": _VEC3,
    },
}


def _obj(props, required=()):
    return {"type": "object", "additionalProperties": False,
            "required": list(required), "properties": props}


SCHEMA = _obj({
    "name": {"type": "string"},
    "mode": {"enum": sorted(MODE_ALIASES)},
    "initial_joints": _VEC6,
    "target_joints": _VEC6,
    "target_pose": _POSE,
    "markers": {"type": "array", "items": _VEC3, "minItems": 3, "maxItems": 3},
    "gains": _obj({"tau_in": _POS, "tau_forward": _POS, "omega_n": _POS, "zeta": _POS}),
    "disturbance": _obj({"amplitude": {"oneOf": [_NUM, _VEC6]}, "onset": _NUM}),
    "duration": _POS,
    "dt": _POS,
    "adaptive_period": _POS,
    "settle_tol": _POS,
    "camera": _obj({"focal_length": _POS, "baseline": _POS}),
    "geometry": _obj({k: _POS for k in ("L1", "L2", "L3", "L4", "a1", "Lt")}),
    "t_ec": _POSE,
}, required=["initial_joints"])


def _pose(d) -> Pose:
    pose = Pose(np.array(d["rotation"], dtype=float), np.array(d["translation"], dtype=float))
    if not pose.is_valid():
        raise ConfigError("rotation is not a proper orthonormal matrix")
    return pose


def parse_config(doc: dict, mode: str | None = None):
    """Validate a decoded document; returns ``(ScenarioConfig, EihParameters)``."""
    try:
        jsonschema.validate(doc, SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"{where}: {exc.message}") from None
    if ("target_joints" in doc) == ("target_pose" in doc):
        raise ConfigError("give exactly one of target_joints or target_pose")

    kw = dict(initial_joints=np.radians(doc["initial_joints"]),
              mode=mode or doc.get("mode", "ff+fb"),
              name=doc.get("name", "custom"))
    if "target_joints" in doc:
        kw["target_joints"] = np.radians(doc["target_joints"])
    else:
        kw["target_pose"] = _pose(doc["target_pose"])
    for key in ("duration", "dt", "adaptive_period", "settle_tol"):
        if key in doc:
            kw[key] = float(doc[key])
    try:
        if "markers" in doc:
            kw["markers"] = MarkerSet(np.array(doc["markers"], dtype=float))
        if "gains" in doc:
            kw["gains"] = ControllerGains(**doc["gains"])
        if "disturbance" in doc:
            dist = doc["disturbance"]
            kw["disturbance"] = Disturbance(np.radians(dist.get("amplitude", 0.0)),
                                            float(dist.get("onset", 0.0)))
        cfg = ScenarioConfig(**kw)
        params = EihParameters(
            intr=CameraIntrinsics(**doc.get("camera", {})),
            geom=RobotGeometry(**doc.get("geometry", {})),
            t_ec=_pose(doc["t_ec"]) if "t_ec" in doc else DEFAULT_T_EC,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    return cfg, params


def load_config(path, mode: str | None = None):
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return parse_config(doc, mode)


def config_to_dict(cfg: ScenarioConfig) -> dict:
    """Inverse of :func:`parse_config` for the scenario part (degrees out)."""
    out = {
        "name": cfg.name,
        "mode": cfg.mode,
        "initial_joints": np.degrees(cfg.initial_joints).tolist(),
        "markers": np.asarray(cfg.markers.points).tolist(),
        "gains": {"tau_in": cfg.gains.tau_in, "tau_forward": cfg.gains.tau_forward,
                  "omega_n": cfg.gains.omega_n, "zeta": cfg.gains.zeta},
        "disturbance": {"amplitude": np.degrees(cfg.disturbance.amplitude).tolist(),
                        "onset": cfg.disturbance.onset},
        "duration": cfg.duration,
        "dt": cfg.dt,
        "adaptive_period": cfg.adaptive_period,
        "settle_tol": cfg.settle_tol,
    }
    if cfg.target_joints is not None:
        out["target_joints"] = np.degrees(cfg.target_joints).tolist()
    else:
        out["target_pose"] = {"rotation": cfg.target_pose.rotation.tolist(),
                              "translation": cfg.target_pose.translation.tolist()}
    return out
