import numpy as np
import pytest

from servo_forge.eye_in_hand import EihParameters, MarkerSet, robot_to_camera
from servo_forge.kinematics import DEFAULT_GEOMETRY, sample_safe_joints

MIN_DEPTH = 0.2  # m; keeps every marker comfortably in front of the lens


def visible_safe_joints(n, seed=0, params=None):
    """Safe-workspace configurations from which all three markers are visible."""
    params = params or EihParameters()
    rng = np.random.default_rng(seed)
    pts = MarkerSet().points
    out = []
    while len(out) < n:
        for q in sample_safe_joints(DEFAULT_GEOMETRY, rng, 4 * n):
            if np.all(robot_to_camera(params, q, pts)[:, 2] > MIN_DEPTH):
                out.append(q)
                if len(out) == n:
                    break
    return np.array(out)


@pytest.fixture(scope="session")
def eih():
    return EihParameters()


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
