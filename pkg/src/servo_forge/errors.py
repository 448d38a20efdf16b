"""Exception types raised across the package."""


class ServoError(Exception):
    """Base class for every error raised by servo_forge."""


class GeometryError(ServoError, ValueError):
    pass


class CollinearPoints(GeometryError):
    pass


class CoincidentPoints(GeometryError):
    pass


class ReflectionDetected(GeometryError):
    pass


class NonPositiveDepth(GeometryError):
    pass


class ZeroDisparity(GeometryError):
    pass


class MarkerBehindCamera(GeometryError):
    def __init__(self, index, depth=None):
        self.index = index
        self.depth = depth
        msg = f"marker {index} is behind the camera"
        if depth is not None:
            msg += f" (Z = {depth:.6g})"
        super().__init__(msg)


class Unreachable(GeometryError):
    pass


class SingularWrist(GeometryError):
    pass


class PoleHit(ServoError, ZeroDivisionError):
    pass


class ImproperTF(ServoError, ValueError):
    pass


class RankDeficient(ServoError, ValueError):
    pass


class TargetUnreachable(ServoError):
    pass


class SimDiverged(ServoError, RuntimeError):
    pass
