"""Synchronization controller: barrier-weighted errors, torque, gradient law.

All functions are pure; the simulator owns the estimate state and feeds it
in explicitly.  The torque uses only delay-available signals; the current
(undelayed) auxiliary error exists for diagnostics alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import BarrierViolationError
from .robot import KinematicParams, jacobian, regularized_inverse

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class BarrierBounds:
    """Per-axis safety bounds.

    k_h bounds the reference trajectory, k_r_bound the robot end-effector;
    the admissible synchronization error is |e_i| < k_m_i with
    k_m = k_r_bound - k_h (must be positive).
    """

    k_h: np.ndarray
    k_r_bound: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "k_h", np.asarray(self.k_h, dtype=float))
        object.__setattr__(self, "k_r_bound", np.asarray(self.k_r_bound, dtype=float))
        if np.any(self.k_m <= 0.0):
            raise ValueError("k_m = k_r_bound - k_h must be positive on every axis")

    @property
    def k_m(self) -> np.ndarray:
        return self.k_r_bound - self.k_h

    @classmethod
    def from_margins(cls, k_h, k_m) -> "BarrierBounds":
        k_h = np.asarray(k_h, dtype=float)
        return cls(k_h=k_h, k_r_bound=k_h + np.asarray(k_m, dtype=float))


@dataclass(frozen=True)
class Gains:
    """Controller and estimator gains.

    delay is the reference-signal time delay T; delta_t the length of one
    learning-stack integration window; n_windows the stack depth.
    """

    k_r: float = 0.1
    k_phi: float = 1.0
    k_1: float = 0.8
    k_icl: float = 100.0
    gamma1: np.ndarray = field(default_factory=lambda: np.eye(2))
    gamma2: np.ndarray = field(default_factory=lambda: 0.5 * np.eye(7))
    alpha_s4: float = 0.002
    n_windows: int = 25
    delta_t: float = 0.2
    delay: float = 0.45

    def __post_init__(self):
        object.__setattr__(self, "gamma1", np.asarray(self.gamma1, dtype=float))
        object.__setattr__(self, "gamma2", np.asarray(self.gamma2, dtype=float))
        for name in ("k_r", "k_phi", "k_1", "k_icl", "alpha_s4", "delay"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"Gains.{name} must be >= 0")
        if self.n_windows < 1:
            raise ValueError("Gains.n_windows must be >= 1")
        if self.delta_t <= 0.0:
            raise ValueError("Gains.delta_t must be > 0")
        for name, n in (("gamma1", 2), ("gamma2", 7)):
            g = getattr(self, name)
            if g.shape != (n, n) or not np.allclose(g, g.T):
                raise ValueError(f"Gains.{name} must be a symmetric {n}x{n} matrix")
            if np.any(np.linalg.eigvalsh(g) <= 0.0):
                raise ValueError(f"Gains.{name} must be positive definite")


@dataclass
class ControlOutput:
    """Signals produced for one control step."""

    tau: np.ndarray
    e_pT: np.ndarray
    eta_T: np.ndarray
    phi_T: np.ndarray
    zeta_y_dot: np.ndarray
    w_yT: np.ndarray


def sync_error_delayed(p: np.ndarray, p_hT: np.ndarray) -> np.ndarray:
    """Position error against the delayed reference: e_pT = p_hT - p."""
    return np.asarray(p_hT, dtype=float) - np.asarray(p, dtype=float)


def barrier_weights(e: np.ndarray, bb: BarrierBounds) -> np.ndarray:
    """Diagonal barrier weights phi_i = 1 / (k_m_i^2 - e_i^2).

    Strictly positive and increasing in |e_i|; raises
    BarrierViolationError at or beyond the bound, where the weight has its
    pole.
    """
    e = np.asarray(e, dtype=float)
    km = bb.k_m
    if np.any(np.abs(e) >= km):
        axes = np.nonzero(np.abs(e) >= km)[0] + 1
        raise BarrierViolationError(
            f"|e| = {np.abs(e)} reached bound k_m = {km} on axis {axes.tolist()}")
    return np.diag(1.0 / (km ** 2 - e ** 2))


def jp_hat_inverse(theta: np.ndarray, zj_hat: KinematicParams) -> np.ndarray:
    """Inverse of the estimated Jacobian under the regularization policy.

    Exact inverse away from singularity; a damped inverse (logged as an
    event) below the soft determinant threshold.
    """
    inv, damped = regularized_inverse(jacobian(theta, zj_hat))
    if damped:
        log.warning("estimated Jacobian near singular at theta=%s; damped inverse used", theta)
    return inv


def eta_delayed(theta_dot: np.ndarray, jp_inv_hat: np.ndarray, p_hT_dot: np.ndarray,
                phi_T: np.ndarray, e_pT: np.ndarray, k_1: float) -> np.ndarray:
    """Auxiliary velocity error from delayed signals.

    eta_T = Jhat^-1 (pdot_hT + k_1 phi_T e_pT) - theta_dot.
    """
    return jp_inv_hat @ (p_hT_dot + k_1 * (np.diag(phi_T) * e_pT)) - theta_dot


def eta_current(theta_dot: np.ndarray, jp_inv_hat: np.ndarray, p_h_dot: np.ndarray,
                phi: np.ndarray, e_p: np.ndarray, k_1: float) -> np.ndarray:
    """Auxiliary error with current (undelayed) signals; diagnostics only."""
    return eta_delayed(theta_dot, jp_inv_hat, p_h_dot, phi, e_p, k_1)


def control_torque(w_yT: np.ndarray, zeta_y_hat: np.ndarray, eta_T: np.ndarray,
                   jp_hat: np.ndarray, phi_T: np.ndarray, e_pT: np.ndarray,
                   g: Gains) -> np.ndarray:
    """Control torque: feedforward plus auxiliary and barrier feedback.

    tau = W_yT zeta_y_hat + k_r eta_T + k_phi Jhat^T phi_T e_pT.
    """
    return (w_yT @ zeta_y_hat + g.k_r * eta_T
            + g.k_phi * (jp_hat.T @ (np.diag(phi_T) * e_pT)))


def zeta_y_derivative(w_yT: np.ndarray, eta_T: np.ndarray, zeta_y_hat: np.ndarray,
                      g: Gains) -> np.ndarray:
    """Gradient update with leakage: Gamma2 W_yT^T eta_T - alpha Gamma2 zeta_hat."""
    return g.gamma2 @ (w_yT.T @ eta_T) - g.alpha_s4 * (g.gamma2 @ zeta_y_hat)


def compute_control(js, p: np.ndarray, delayed, zeta_j_hat: np.ndarray,
                    zeta_y_hat: np.ndarray, zeta_j_dot: np.ndarray,
                    bounds: BarrierBounds, gains: Gains,
                    gravity: float) -> ControlOutput:
    """Full torque pipeline for one control step.

    Takes the measured joint state, the true end-effector position, the
    delayed reference sample, and the current estimates (plus the
    kinematic estimate rate, which feeds the Jacobian time derivative
    inside the reference acceleration).  Raises BarrierViolationError when
    the delayed error has left its bounds.
    """
    from .robot import (dynamic_regressor_delayed, jacobian,
                        reference_acceleration_delayed, regularized_inverse)

    e_pT = sync_error_delayed(p, delayed.p)
    phi_T = barrier_weights(e_pT, bounds)
    zj_hat = KinematicParams(zeta_j_hat)
    jhat = jacobian(js.theta, zj_hat)
    jinv, _ = regularized_inverse(jhat)
    eta_T = eta_delayed(js.theta_dot, jinv, delayed.p_dot, phi_T, e_pT, gains.k_1)
    e_pT_dot = delayed.p_dot - jhat @ js.theta_dot  # estimated; true J unknown
    a_T = reference_acceleration_delayed(js, zj_hat, zeta_j_dot, delayed, e_pT,
                                         e_pT_dot, phi_T, gains.k_1)
    w_yT = dynamic_regressor_delayed(js, a_T, eta_T, gravity)
    tau = control_torque(w_yT, zeta_y_hat, eta_T, jhat, phi_T, e_pT, gains)
    return ControlOutput(tau=tau, e_pT=e_pT, eta_T=eta_T, phi_T=phi_T,
                         zeta_y_dot=zeta_y_derivative(w_yT, eta_T, zeta_y_hat, gains),
                         w_yT=w_yT)
