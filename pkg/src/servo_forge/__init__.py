"""Stereo eye-in-hand visual servoing: kinematics, stereo geometry, Youla
controller synthesis and a fixed-step closed-loop simulator."""

from .camera import CameraIntrinsics, project, triangulate
from .errors import *  # noqa: F401,F403
from .eye_in_hand import (EihParameters, MarkerSet, eih_jacobian, eih_map,
                          estimate_joints, pose_from_features, robot_to_camera)
from .kinematics import (DEFAULT_GEOMETRY, RobotGeometry, check_limits,
                         forward_kinematics, inverse_kinematics)
from .se3 import Pose, compose, inverse, rigid_register, transform_point
from .sim import ScenarioConfig, builtin_scenario, run_scenario, settling_time
from .youla import ControllerGains, synthesize_inner, synthesize_outer

__version__ = "0.1.0"
