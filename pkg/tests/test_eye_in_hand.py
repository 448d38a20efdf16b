import math

import numpy as np
import pytest

from conftest import visible_safe_joints
from servo_forge.camera import project
from servo_forge.errors import CoincidentPoints, CollinearPoints, MarkerBehindCamera
from servo_forge.eye_in_hand import (DEFAULT_T_EC, EihParameters, MarkerSet, camera_pose,
                                     eih_jacobian, eih_map, estimate_joints, p2p_circle,
                                     p2p_pose_family, pose_from_features, robot_to_camera)
from servo_forge.kinematics import forward_kinematics
from servo_forge.se3 import Pose, compose, inverse, transform_point

d = np.radians
IDENTITY_EC = EihParameters(t_ec=Pose.identity())
HOME_TOOL = np.array([[0, 0, 1, 1.27], [0, 1, 0, 0], [-1, 0, 0, 1.57], [0, 0, 0, 1.0]])


def test_camera_center_maps_to_origin():
    assert np.allclose(robot_to_camera(IDENTITY_EC, np.zeros(6), (1.27, 0, 1.57)), 0, atol=1e-12)


def test_point_on_home_approach_axis():
    assert np.allclose(robot_to_camera(IDENTITY_EC, np.zeros(6), (2.27, 0, 1.57)), (0, 0, 1),
                       atol=1e-12)


def test_default_camera_looks_along_tool_n_axis(eih):
    # 1 m along n = (0, 0, -1) from the home tool origin lands on the optical axis
    assert np.allclose(robot_to_camera(eih, np.zeros(6), (1.27, 0, 0.57)), (0, 0, 1), atol=1e-12)


def test_robot_to_camera_preserves_distances(eih):
    rng = np.random.default_rng(0)
    q = rng.uniform(-1, 1, 6)
    p1, p2 = rng.normal(size=(2, 3))
    c1, c2 = robot_to_camera(eih, q, np.array([p1, p2]))
    assert math.isclose(np.linalg.norm(c1 - c2), np.linalg.norm(p1 - p2), rel_tol=1e-12)


def test_marker_set_rejects_collinear():
    with pytest.raises(CollinearPoints):
        MarkerSet(np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0.0]]))
    assert np.allclose(MarkerSet().points, [[-0.5, 0, 0], [0, 0, 0.5], [2, -2, 0]])


def test_eih_map_ordering_and_values(eih):
    q = d([0.48, 2.21, 2.05, -82.68, 9.46, 77.47])
    f = eih_map(eih, q)
    pc = robot_to_camera(eih, q, MarkerSet().points) * 1000
    assert f.shape == (9,)
    assert np.allclose(f.reshape(3, 3), project(eih.intr, pc), atol=0)


def test_marker_on_optical_axis_is_symmetric(eih):
    q = d([10, 5, 3, 20, 40, -10])
    cam = camera_pose(eih, q)
    on_axis = transform_point(cam, (0, 0, 1.5))
    f = eih_map(eih, q, np.array([on_axis, on_axis + (0.1, 0, 0), on_axis + (0, 0.1, 0)]))
    assert math.isclose(f[0], -f[1], rel_tol=1e-9)
    assert abs(f[2]) < 1e-12


def test_marker_behind_camera_identity_mount():
    # with the camera looking along the tool a-axis, marker 1 sits behind the lens at home
    with pytest.raises(MarkerBehindCamera) as exc:
        eih_map(IDENTITY_EC, np.zeros(6))
    assert exc.value.index == 1


def richardson_jacobian(params, q, h=1e-3):
    def five_point(step):
        J = np.empty((9, 6))
        for j in range(6):
            e = np.zeros(6)
            e[j] = step
            f = lambda k: eih_map(params, q + k * e)  # noqa: E731
            J[:, j] = (-f(2) + 8 * f(1) - 8 * f(-1) + f(-2)) / (12 * step)
        return J

    return (16 * five_point(h / 2) - five_point(h)) / 15


def test_jacobian_matches_richardson_oracle(eih):
    for q in visible_safe_joints(20, seed=1):
        J = eih_jacobian(eih, q)
        ref = richardson_jacobian(eih, q)
        assert np.linalg.norm(J - ref) < 1e-6 * np.linalg.norm(ref)


def test_jacobian_directional_derivative(eih):
    q = visible_safe_joints(1, seed=2)[0]
    delta = np.random.default_rng(3).normal(size=6)
    J = eih_jacobian(eih, q)
    errs = []
    for eps in (1e-3, 1e-4):
        fd = (eih_map(eih, q + eps * delta) - eih_map(eih, q)) / eps
        errs.append(np.linalg.norm(fd - J @ delta))
    assert errs[1] < 0.2 * errs[0]  # first-order convergence


def test_jacobian_rank_drops_at_wrist_singularity(eih):
    sv = np.linalg.svd(eih_jacobian(eih, d([5, 10, 5, 0, 0, 0])), compute_uv=False)
    assert sv[-1] / sv[0] < 1e-8


def test_pose_from_features_home(eih):
    cam = pose_from_features(eih.intr, eih_map(eih, np.zeros(6)))
    assert np.allclose(compose(cam, eih.t_ec).matrix, HOME_TOOL, atol=1e-9)


def test_pose_from_features_random(eih):
    for q in visible_safe_joints(20, seed=4):
        cam = pose_from_features(eih.intr, eih_map(eih, q))
        expected = inverse(compose(eih.t_ec, inverse(forward_kinematics(eih.geom, q))))
        assert np.allclose(cam.matrix, expected.matrix, atol=1e-9)


def test_pose_from_features_collinear(eih):
    bad = np.array([[0, 0, 0], [1, 0, 0], [2, 0, 0.0]])
    f = np.tile([-0.2, 0.2, 0.0], 3)
    with pytest.raises(CollinearPoints):
        pose_from_features(eih.intr, f, bad)


def test_estimate_joints_scenario2_initial(eih):
    q = d([42.40, 21.20, 4.58, -2.86, 66.46, -42.40])
    assert np.abs(estimate_joints(eih, eih_map(eih, q)) - q).max() < 1e-6


def test_estimate_joints_home(eih):
    assert np.abs(estimate_joints(eih, eih_map(eih, np.zeros(6)))).max() < 1e-9


def test_estimate_joints_round_trip(eih):
    for q in visible_safe_joints(50, seed=5):
        assert np.abs(estimate_joints(eih, eih_map(eih, q)) - q).max() < 1e-6


def test_estimate_joints_tracks_branch(eih):
    q = d([3, 4, 5, 200, 30, -190])  # wrapped q4, q6 beyond the principal range
    got = estimate_joints(eih, eih_map(eih, q), near=q + 0.01)
    assert np.abs(got - q).max() < 1e-9


def test_p3p_uniqueness(eih):
    Q = visible_safe_joints(30, seed=6)
    F = np.array([eih_map(eih, q) for q in Q])
    for i in range(len(Q)):
        for j in range(i + 1, len(Q)):
            assert np.abs(F[i] - F[j]).max() > 0


# ambiguity families

P1 = np.array([0.3, -0.2, 2.0])
P2 = np.array([-0.4, 0.1, 2.6])


def test_p2p_angle_zero_is_identity():
    assert np.allclose(p2p_pose_family(P1, P2, 0.0).matrix, np.eye(4), atol=1e-15)


def test_p2p_preserves_ranges_and_features(eih):
    for angle in np.linspace(-0.5, 0.5, 9):
        G = p2p_pose_family(P1, P2, angle)
        c1, c2 = transform_point(inverse(G), P1), transform_point(inverse(G), P2)
        assert math.isclose(np.linalg.norm(c1), np.linalg.norm(P1), rel_tol=1e-12)
        assert math.isclose(np.linalg.norm(c2), np.linalg.norm(P2), rel_tol=1e-12)
        assert np.allclose(project(eih.intr, np.array([c1, c2]) * 1000),
                           project(eih.intr, np.array([P1, P2]) * 1000), atol=1e-9)


def test_p2p_origin_on_circle():
    center, radius = p2p_circle(P1, P2)
    k = (P2 - P1) / np.linalg.norm(P2 - P1)
    # foot of the perpendicular from the original camera center onto the line
    assert abs(center @ k) < 1e-12
    assert np.allclose(np.cross(center - P1, k), 0, atol=1e-12)
    for angle in (0.3, 1.0, 2.5):
        origin = p2p_pose_family(P1, P2, angle).translation
        assert math.isclose(np.linalg.norm(origin - center), radius, rel_tol=1e-12)
    # radius is the height of the triangle (camera, p1, p2) over the base p1 p2
    area2 = np.linalg.norm(np.cross(P1, P2))
    assert math.isclose(radius, area2 / np.linalg.norm(P2 - P1), rel_tol=1e-12)


def test_p2p_coincident():
    with pytest.raises(CoincidentPoints):
        p2p_pose_family(P1, P1, 0.2)


def test_p1p_range_invariance():
    # any rotation about the marker keeps the camera's range to it
    rng = np.random.default_rng(7)
    for _ in range(10):
        axis = rng.normal(size=3)
        G = p2p_pose_family(P1, P1 + axis, rng.uniform(-1, 1))
        assert math.isclose(np.linalg.norm(transform_point(inverse(G), P1)),
                            np.linalg.norm(P1), rel_tol=1e-12)
