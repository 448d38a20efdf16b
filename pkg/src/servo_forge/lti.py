"""Scalar rational transfer functions and their bilinear discretization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as P
from scipy import signal

from .errors import ImproperTF, PoleHit


def _trim(c) -> np.ndarray:
    c = np.atleast_1d(np.asarray(c, dtype=float))
    nz = np.flatnonzero(c)
    if len(nz) == 0:
        return np.zeros(1)
    return c[: nz[-1] + 1].copy()


def poly_from_roots_scaled(factors) -> np.ndarray:
    """Product of ascending-coefficient polynomials."""
    out = np.ones(1)
    for f in factors:
        out = P.polymul(out, f)
    return _trim(out)


class RationalTF:
    """``num(s) / den(s)`` with coefficients in ascending powers of ``s``.

    Arithmetic never cancels factors on its own; use :meth:`cancel` with a
    known common factor to get minimal forms.
    """

    __slots__ = ("num", "den")

    def __init__(self, num, den=(1.0,)):
        num = _trim(num)
        den = _trim(den)
        if not np.any(den):
            raise ZeroDivisionError("denominator is identically zero")
        self.num = num
        self.den = den

    @classmethod
    def s(cls) -> "RationalTF":
        return cls([0.0, 1.0])

    @classmethod
    def const(cls, k: float) -> "RationalTF":
        return cls([k])

    @property
    def order(self) -> int:
        return len(self.den) - 1

    @property
    def is_proper(self) -> bool:
        return len(self.num) <= len(self.den)

    def __call__(self, s):
        return tf_eval(self, s)

    def _coerce(self, other) -> "RationalTF":
        if isinstance(other, RationalTF):
            return other
        return RationalTF([float(other)])

    def __add__(self, other):
        o = self._coerce(other)
        return RationalTF(P.polyadd(P.polymul(self.num, o.den), P.polymul(o.num, self.den)),
                          P.polymul(self.den, o.den))

    __radd__ = __add__

    def __neg__(self):
        return RationalTF(-self.num, self.den)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return RationalTF(P.polymul(self.num, o.num), P.polymul(self.den, o.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        return RationalTF(P.polymul(self.num, o.den), P.polymul(self.den, o.num))

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def feedback(self, other=1.0) -> "RationalTF":
        """Negative-feedback closed loop ``self / (1 + self*other)``."""
        o = self._coerce(other)
        return RationalTF(P.polymul(self.num, o.den),
                          P.polyadd(P.polymul(self.den, o.den), P.polymul(self.num, o.num)))

    def normalized(self) -> "RationalTF":
        """Scale so the lowest-order nonzero denominator coefficient is 1."""
        k = self.den[np.flatnonzero(self.den)[0]]
        return RationalTF(self.num / k, self.den / k)

    def cancel(self, factor, rtol: float = 1e-9) -> "RationalTF":
        """Divide a common polynomial factor out of numerator and denominator."""
        f = _trim(factor)
        qn, rn = P.polydiv(self.num, f)
        qd, rd = P.polydiv(self.den, f)
        for q, r, full in ((qn, rn, self.num), (qd, rd, self.den)):
            if np.max(np.abs(r)) > rtol * max(np.max(np.abs(full)), 1e-300):
                raise ValueError("factor does not divide the transfer function exactly")
        return RationalTF(qn, qd)

    def strip_origin(self) -> "RationalTF":
        """Cancel common powers of ``s`` (exact: leading zero coefficients)."""
        k = 0
        while (k + 1 < len(self.num) and k + 1 < len(self.den)
               and self.num[k] == 0.0 and self.den[k] == 0.0):
            k += 1
        return RationalTF(self.num[k:], self.den[k:])

    def poles(self) -> np.ndarray:
        return P.polyroots(self.den) if len(self.den) > 1 else np.array([])

    def zeros(self) -> np.ndarray:
        return P.polyroots(self.num) if len(self.num) > 1 else np.array([])

    def dcgain(self) -> float:
        return float(np.real(tf_eval(self, 0.0)))

    def same_as(self, other, rtol: float = 1e-12) -> bool:
        """Coefficient-wise equality after normalization."""
        a, b = self.normalized(), self._coerce(other).normalized()
        if len(a.num) != len(b.num) or len(a.den) != len(b.den):
            return False
        scale = max(np.abs(a.num).max(), np.abs(a.den).max(), 1e-300)
        return bool(np.allclose(a.num, b.num, rtol=rtol, atol=rtol * scale)
                    and np.allclose(a.den, b.den, rtol=rtol, atol=rtol * scale))

    def __repr__(self):
        return f"RationalTF(num={self.num.tolist()}, den={self.den.tolist()})"


def tf_eval(tf: RationalTF, s):
    d = P.polyval(s, tf.den)
    if np.any(d == 0):
        raise PoleHit(f"s = {s} is a pole")
    return P.polyval(s, tf.num) / d


@dataclass
class StateSpaceD:
    """Discrete state space ``x+ = A x + B u``, ``y = C x + D u``.

    The state may hold several independent copies of the same SISO system:
    ``x`` has shape ``(n, m)`` and ``step`` takes ``m`` inputs at once.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: float
    dt: float
    x: np.ndarray = field(default=None)

    def __post_init__(self):
        n = self.A.shape[0]
        if self.A.shape != (n, n) or self.B.shape != (n,) or self.C.shape != (n,):
            raise ValueError("inconsistent state-space dimensions")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.x is None:
            self.x = np.zeros((n, 1))

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def reset(self, channels: int = 1, x0=None):
        self.x = np.zeros((self.n, channels)) if x0 is None else np.array(x0, dtype=float)

    def output(self, u) -> np.ndarray:
        return self.C @ self.x + self.D * np.asarray(u, dtype=float)

    def advance(self, u):
        self.x = self.A @ self.x + np.outer(self.B, u)

    def step(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        y = self.output(u)
        self.advance(u)
        return y

    def steady_state(self, u: float) -> np.ndarray:
        """Equilibrium state for a constant input (requires no pole at z = 1)."""
        n = self.n
        return np.linalg.solve(np.eye(n) - self.A, self.B * u)

    def dcgain(self) -> float:
        n = self.n
        if n == 0:
            return float(self.D)
        return float(self.C @ np.linalg.solve(np.eye(n) - self.A, self.B) + self.D)

    def simulate(self, u) -> np.ndarray:
        self.reset(1)
        return np.array([self.step([uk])[0] for uk in np.asarray(u, dtype=float)])


def realize_discrete(tf: RationalTF, dt: float) -> StateSpaceD:
    """Controllable-canonical realization discretized with the bilinear map."""
    if not tf.is_proper:
        raise ImproperTF(f"numerator degree {len(tf.num) - 1} exceeds denominator degree "
                         f"{len(tf.den) - 1}")
    if not dt > 0:
        raise ValueError("dt must be positive")
    num, den = tf.num[::-1], tf.den[::-1]
    if len(den) == 1:
        return StateSpaceD(np.zeros((0, 0)), np.zeros(0), np.zeros(0),
                           float(num[0] / den[0]), dt)
    A, B, C, D = signal.tf2ss(num, den)
    Ad, Bd, Cd, Dd, _ = signal.cont2discrete((A, B, C, D), dt, method="bilinear")
    return StateSpaceD(np.asarray(Ad), np.asarray(Bd).ravel(), np.asarray(Cd).ravel(),
                       float(np.asarray(Dd).ravel()[0]), dt)
