import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from servo_forge.errors import CollinearPoints, ReflectionDetected
from servo_forge.se3 import (Pose, compose, inverse, reorthonormalize, renormalize,
                             rigid_register, rot_x, rot_y, rot_z, rotation_angle,
                             transform_point)


def random_pose(rng):
    q = rng.normal(size=4)
    q /= np.linalg.norm(q)
    w, x, y, z = q
    R = np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - z * w), 2 * (x * z + y * w)],
        [2 * (x * y + z * w), 1 - 2 * (x * x + z * z), 2 * (y * z - x * w)],
        [2 * (x * z - y * w), 2 * (y * z + x * w), 1 - 2 * (x * x + y * y)],
    ])
    return Pose(R, rng.uniform(-2, 2, 3))


def test_compose_identity():
    I = Pose.identity()
    assert np.array_equal(compose(I, I).matrix, np.eye(4))


def test_compose_inverse_is_identity():
    P = random_pose(np.random.default_rng(3))
    assert np.allclose(compose(P, inverse(P)).matrix, np.eye(4), atol=1e-9)


def test_quarter_turns_add():
    R = compose(Pose(rot_z(math.pi / 2)), Pose(rot_z(math.pi / 2))).rotation
    assert np.allclose(R, rot_z(math.pi), atol=1e-15)


def test_compose_matches_matrix_product_and_associates():
    rng = np.random.default_rng(4)
    a, b, c = (random_pose(rng) for _ in range(3))
    assert np.allclose(compose(a, b).matrix, a.matrix @ b.matrix, atol=1e-14)
    assert np.allclose(compose(compose(a, b), c).matrix, compose(a, compose(b, c)).matrix,
                       atol=1e-14)


@pytest.mark.parametrize("pose, pt, expected", [
    (Pose.identity(), (1, 2, 3), (1, 2, 3)),
    (Pose.from_translation((0, 0, 1)), (0, 0, 0), (0, 0, 1)),
    (Pose(rot_z(math.pi / 2)), (1, 0, 0), (0, 1, 0)),
])
def test_transform_point(pose, pt, expected):
    assert np.allclose(transform_point(pose, pt), expected, atol=1e-15)


def test_transform_point_stack():
    P = random_pose(np.random.default_rng(5))
    pts = np.arange(12.0).reshape(4, 3)
    assert np.allclose(transform_point(P, pts), [transform_point(P, p) for p in pts])


def test_pose_is_read_only():
    P = Pose.identity()
    with pytest.raises(ValueError):
        P.rotation[0, 0] = 2.0


def test_elementary_rotations_are_proper():
    for R in (rot_x(0.3), rot_y(-1.2), rot_z(2.5)):
        assert np.allclose(R.T @ R, np.eye(3), atol=1e-15)
        assert math.isclose(np.linalg.det(R), 1.0, abs_tol=1e-15)


def test_renormalize_projects_drifted_rotation():
    R = rot_z(0.4) + 1e-6 * np.random.default_rng(0).normal(size=(3, 3))
    P = renormalize(Pose(R, np.zeros(3)))
    assert P.is_valid()
    assert np.allclose(P.rotation, rot_z(0.4), atol=1e-5)
    tidy = Pose(rot_z(0.4))
    assert renormalize(tidy) is tidy
    assert np.allclose(reorthonormalize(rot_x(1.0)), rot_x(1.0), atol=1e-15)


def test_rotation_angle():
    assert math.isclose(rotation_angle(rot_x(0.7)), 0.7, rel_tol=1e-12)


# registration

def test_register_same_points_is_identity():
    S = np.array([[0.1, 0.2, 0.3], [1.0, -0.5, 0.0], [0.3, 0.9, -0.4]])
    T = rigid_register(S, S)
    assert np.allclose(T.matrix, np.eye(4), atol=1e-12)


def test_register_known_quarter_turn():
    src = np.eye(3)
    dst = src @ rot_z(math.pi / 2).T + [1.0, 0.0, 0.0]
    T = rigid_register(src, dst)
    assert np.allclose(T.rotation, rot_z(math.pi / 2), atol=1e-12)
    assert np.allclose(T.translation, [1, 0, 0], atol=1e-12)


def test_register_collinear_raises():
    with pytest.raises(CollinearPoints):
        rigid_register([[0, 0, 0], [1, 0, 0], [2, 0, 0]], [[0, 0, 0], [1, 0, 0], [2, 0, 0]])


def test_register_rejects_true_reflection():
    rng = np.random.default_rng(9)
    src = rng.normal(size=(6, 3))
    mirrored = src * [1, 1, -1]
    with pytest.raises(ReflectionDetected):
        rigid_register(src, mirrored)


def test_register_planar_triplet_never_returns_reflection():
    # three points are always coplanar, so the Kabsch sign fix must kick in
    rng = np.random.default_rng(10)
    for _ in range(50):
        src = rng.normal(size=(3, 3))
        T = random_pose(rng)
        got = rigid_register(src, transform_point(T, src))
        assert np.linalg.det(got.rotation) > 0
        assert np.allclose(got.matrix, T.matrix, atol=1e-9)


def test_register_least_squares_beats_perturbations():
    rng = np.random.default_rng(11)
    src = rng.normal(size=(8, 3))
    dst = transform_point(random_pose(rng), src) + 1e-3 * rng.normal(size=(8, 3))
    best = rigid_register(src, dst)

    def cost(P):
        return np.sum((transform_point(P, src) - dst) ** 2)

    for _ in range(20):
        nudge = Pose(rot_x(1e-3 * rng.normal()) @ rot_y(1e-3 * rng.normal()), 1e-4 * rng.normal(size=3))
        assert cost(best) <= cost(compose(nudge, best)) + 1e-15


points = st.lists(st.tuples(*[st.floats(-3, 3, allow_nan=False)] * 3), min_size=3, max_size=6)


@settings(max_examples=60, deadline=None)
@given(points, st.integers(0, 2 ** 32 - 1))
def test_register_recovers_any_rigid_transform(pts, seed):
    src = np.array(pts)
    centered = src - src.mean(axis=0)
    sv = np.linalg.svd(centered, compute_uv=False)
    if sv[1] < 1e-2 * max(sv[0], 1e-12):
        return  # nearly collinear sets are ill-posed, not a failure
    T = random_pose(np.random.default_rng(seed))
    got = rigid_register(src, transform_point(T, src))
    assert np.linalg.norm(got.rotation - T.rotation) < 1e-9
    assert np.linalg.norm(got.translation - T.translation) < 1e-9


def test_register_permutation_invariant():
    rng = np.random.default_rng(12)
    src = rng.normal(size=(5, 3))
    dst = transform_point(random_pose(rng), src) + 1e-2 * rng.normal(size=(5, 3))
    perm = rng.permutation(5)
    a, b = rigid_register(src, dst), rigid_register(src[perm], dst[perm])
    assert np.allclose(a.matrix, b.matrix, atol=1e-12)


def test_register_residual_invariant_under_common_motion():
    rng = np.random.default_rng(13)
    src = rng.normal(size=(5, 3))
    dst = transform_point(random_pose(rng), src) + 1e-2 * rng.normal(size=(5, 3))
    G = random_pose(rng)

    def residual(s, d):
        return np.sum((transform_point(rigid_register(s, d), s) - d) ** 2)

    assert math.isclose(residual(src, dst),
                        residual(transform_point(G, src), transform_point(G, dst)),
                        rel_tol=1e-9)
