"""Youla-parameterized controller synthesis for the cascaded servo loop.

Three designs share the same closed-loop building blocks:

* inner joint loop on the feedback-linearized plant ``1/s^2``;
* feedforward inverse of the inner closed loop;
* adaptive outer loop on ``C1 * T_inner(s)``, decoupled by the SVD of the
  9x6 image Jacobian ``C1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from .errors import RankDeficient
from .lti import RationalTF, StateSpaceD, poly_from_roots_scaled, realize_discrete

RANK_RTOL = 1e-9


@dataclass(frozen=True)
class ControllerGains:
    tau_in: float = 0.01
    tau_forward: Optional[float] = None  # defaults to 0.1 * tau_in
    omega_n: float = 10.0
    zeta: float = 10.0

    def __post_init__(self):
        if not self.tau_in > 0:
            raise ValueError("tau_in must be positive")
        if self.tau_forward is None:
            object.__setattr__(self, "tau_forward", 0.1 * self.tau_in)
        if not self.tau_forward > 0:
            raise ValueError("tau_forward must be positive")
        if not self.zeta > 0:
            raise ValueError("zeta must be positive")
        if not 1.0 / self.omega_n > self.tau_in:
            raise ValueError("outer bandwidth must stay below the inner loop: "
                             "1/omega_n > tau_in")


@dataclass(frozen=True)
class InnerDesign:
    T: RationalTF
    Y: RationalTF
    S: RationalTF
    Gc: RationalTF
    Gp: RationalTF


def _lag(tau: float) -> np.ndarray:
    return np.array([1.0, tau])


def _cube(tau: float) -> np.ndarray:
    # (tau s + 1)^3, written out so the s^1 coefficient is exactly 3*tau
    return np.array([1.0, 3 * tau, 3 * tau ** 2, tau ** 3])


def inner_closed_loop(tau: float) -> RationalTF:
    """``(3 tau s + 1) / (tau s + 1)^3``."""
    return RationalTF([1.0, 3 * tau], _cube(tau))


def synthesize_inner(gains: ControllerGains) -> InnerDesign:
    tau = gains.tau_in
    Gp = RationalTF([1.0], [0.0, 0.0, 1.0])
    T = inner_closed_loop(tau)
    Y = T / Gp  # s^2 (3 tau s + 1) / (tau s + 1)^3
    S = 1 - T  # s^2 (tau^3 s + 3 tau^2) / (tau s + 1)^3
    Gc = (Y / S).strip_origin().cancel(_cube(tau))
    return InnerDesign(T=T, Y=Y, S=S, Gc=Gc, Gp=Gp)


def synthesize_feedforward(gains: ControllerGains) -> RationalTF:
    """``(tau s + 1)^3 / [(3 tau s + 1)(tau_f s + 1)^2]``."""
    tau, tf = gains.tau_in, gains.tau_forward
    return RationalTF(_cube(tau),
                      poly_from_roots_scaled([[1.0, 3 * tau], _lag(tf), _lag(tf)]))


def butterworth_target(gains: ControllerGains) -> RationalTF:
    w, z = gains.omega_n, gains.zeta
    return RationalTF([w * w], [w * w, 2 * z * w, 1.0])


def unit_channel_controller(gains: ControllerGains) -> RationalTF:
    """Channel controller for a unit singular value.

    ``M_Y / (1 - M_T)`` with the Butterworth denominator cancelled:
    ``w^2 (tau s + 1)^3 / [s (s + 2 zeta w)(3 tau s + 1)]``.
    """
    MT = butterworth_target(gains)
    MY = MT / inner_closed_loop(gains.tau_in)
    return (MY / (1 - MT)).cancel(MT.den)


@dataclass(eq=False)
class OuterSynthesis:
    """SVD-decoupled outer-loop design.

    ``C1 = U diag(gains) V^T``.  The assembled controller is
    ``G_C(s) = V diag(channel_tfs) U[:, :6]^T``; since every channel shares
    the same dynamics up to ``1/gain``, the realized controller keeps its
    state in joint coordinates driven by ``V diag(1/gains) U[:, :6]^T e``,
    which leaves the output continuous when ``U``, ``V`` or the gains change.
    """

    C1: np.ndarray
    U: np.ndarray
    V: np.ndarray
    gains: np.ndarray
    design: ControllerGains
    unit_tf: RationalTF
    channel_tfs: List[RationalTF]
    state: Optional[np.ndarray] = None  # (n_states, 6), joint coordinates

    @property
    def U6(self) -> np.ndarray:
        return self.U[:, : len(self.gains)]

    @property
    def pinv(self) -> np.ndarray:
        """``V diag(1/gains) U6^T``: the static part of ``G_C``."""
        return (self.V / self.gains) @ self.U6.T

    @property
    def channel_state(self) -> Optional[np.ndarray]:
        if self.state is None:
            return None
        return self.state @ self.V

    def plant(self, s) -> np.ndarray:
        return self.C1 * complex(inner_closed_loop(self.design.tau_in)(s))

    def youla(self, s) -> np.ndarray:
        MT = butterworth_target(self.design)(s)
        MP = inner_closed_loop(self.design.tau_in)(s)
        my = MT / (self.gains * MP)
        return (self.V * my) @ self.U6.T

    def closed_loop(self, s) -> np.ndarray:
        """``T_y(s) = G_p(s) Y(s)`` (9x9)."""
        return self.plant(s) @ self.youla(s)

    def sensitivity(self, s) -> np.ndarray:
        return np.eye(self.C1.shape[0]) - self.closed_loop(s)

    def controller(self, s) -> np.ndarray:
        g = np.array([complex(tf(s)) for tf in self.channel_tfs])
        return (self.V * g) @ self.U6.T

    def dc_projector(self) -> np.ndarray:
        """``T_y(0)``; evaluated from the assembled blocks."""
        return np.real(self.closed_loop(0.0))


def _decompose(C1: np.ndarray):
    C1 = np.asarray(C1, dtype=float)
    if C1.ndim != 2 or C1.shape[0] < C1.shape[1]:
        raise ValueError("C1 must be a tall matrix (features x joints)")
    U, sv, Vt = np.linalg.svd(C1)
    if sv[0] == 0.0 or sv[-1] / sv[0] < RANK_RTOL:
        ratio = 0.0 if sv[0] == 0.0 else sv[-1] / sv[0]
        raise RankDeficient(f"C1 is rank deficient: sigma_min/sigma_max = {ratio:.3g}")
    return C1, U, sv, Vt.T


def synthesize_outer(C1, gains: ControllerGains, tau_in: Optional[float] = None) -> OuterSynthesis:
    if tau_in is not None and tau_in != gains.tau_in:
        gains = replace(gains, tau_in=tau_in)
    C1, U, sv, V = _decompose(C1)
    unit = unit_channel_controller(gains)
    channel = [RationalTF(unit.num / g, unit.den) for g in sv]
    return OuterSynthesis(C1=C1, U=U, V=V, gains=sv, design=gains,
                          unit_tf=unit, channel_tfs=channel)


def _align(new: np.ndarray, old: np.ndarray, k: int):
    """Sign flips that make the first ``k`` columns of ``new`` point along ``old``."""
    signs = np.sign(np.einsum("ij,ij->j", new[:, :k], old[:, :k]))
    signs[signs == 0] = 1.0
    return signs


def adaptive_update(synth: OuterSynthesis, C1_new) -> OuterSynthesis:
    """Re-synthesize for a new Jacobian, keeping singular-vector signs and state."""
    C1_new, U, sv, V = _decompose(C1_new)
    if np.array_equal(C1_new, synth.C1):
        return synth
    k = len(sv)
    signs = _align(V, synth.V, k)
    V = V * signs
    U = U.copy()
    U[:, :k] *= signs
    U[:, k:] *= _align(U[:, k:], synth.U[:, k:], U.shape[1] - k)
    unit = synth.unit_tf
    channel = [RationalTF(unit.num / g, unit.den) for g in sv]
    return OuterSynthesis(C1=C1_new, U=U, V=V, gains=sv, design=synth.design,
                          unit_tf=unit, channel_tfs=channel, state=synth.state)


class OuterController:
    """Discrete realization of ``G_C``: maps the 9-feature error to joint
    corrections, advancing one sample per call."""

    def __init__(self, synth: OuterSynthesis, dt: float):
        self.synth = synth
        self.block = realize_discrete(synth.unit_tf, dt)
        if synth.state is None:
            synth.state = np.zeros((self.block.n, synth.V.shape[0]))
        self.block.x = synth.state

    def update(self, C1_new) -> None:
        self.synth.state = self.block.x
        self.synth = adaptive_update(self.synth, C1_new)
        self.block.x = self.synth.state

    def output(self, error) -> np.ndarray:
        return self.block.output(self.synth.pinv @ np.asarray(error, dtype=float))

    def step(self, error) -> np.ndarray:
        w = self.synth.pinv @ np.asarray(error, dtype=float)
        y = self.block.output(w)
        self.block.advance(w)
        self.synth.state = self.block.x
        return y
