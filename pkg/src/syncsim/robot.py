"""Planar two-link arm: ground-truth dynamics, kinematics, and regressors.

The plant is a 2R arm moving in a vertical plane with a point mass at the
end of each link and viscous friction at each joint.  That model admits an
exact linear parametrization of the dynamics with seven base parameters
(three inertia products, two gravity products, two friction coefficients)
and of the velocity kinematics with two (the link lengths), which is what
the adaptive controller estimates.

All operations are pure functions of their inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import JacobianSingularError, WorkspaceError
from .trajectory import TaskPoint

GRAVITY = 9.81

# Jacobian-inverse regularization policy.  The exact inverse is used while
# the smallest singular value stays above SIGMA_SOFT; below it a damped
# least-squares inverse takes over with damping that ramps up smoothly as
# the configuration folds, capping the inverse gain near 1/SIGMA_SOFT.
# The reference trajectory may dip outside the reachable annulus, where a
# tracking arm approaches its fold singularity, so the guard must engage
# while the commanded joint velocities are still moderate; a tighter
# threshold lets the fold chatter build up until the feedforward (which
# squares the inverse) diverges.
SIGMA_SOFT = 0.2
SIGMA_HARD = 1e-6
LAMBDA_MAX = 0.02


@dataclass(frozen=True)
class RobotParams:
    """Physical parameters of the arm (SI units).

    m1, m2 are the point masses at the link ends, l1, l2 the link lengths,
    g the gravitational acceleration and fv1, fv2 the viscous friction
    coefficients of the two joints.
    """

    m1: float
    m2: float
    l1: float
    l2: float
    g: float = GRAVITY
    fv1: float = 0.1
    fv2: float = 0.1

    def __post_init__(self):
        for name in ("m1", "m2", "l1", "l2"):
            if not getattr(self, name) > 0.0:
                raise ValueError(f"RobotParams.{name} must be > 0")
        if self.fv1 < 0.0 or self.fv2 < 0.0:
            raise ValueError("friction coefficients must be >= 0")


@dataclass
class JointState:
    """Joint angles and velocities at a timestamp."""

    theta: np.ndarray
    theta_dot: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=float)
        self.theta_dot = np.asarray(self.theta_dot, dtype=float)
        if not (np.all(np.isfinite(self.theta)) and np.all(np.isfinite(self.theta_dot))):
            raise ValueError("joint state must be finite")


@dataclass(frozen=True)
class KinematicParams:
    """Kinematic parameter vector: the link lengths [l1, l2]."""

    zeta_j: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "zeta_j", np.asarray(self.zeta_j, dtype=float))
        if self.zeta_j.shape != (2,) or not np.all(np.isfinite(self.zeta_j)):
            raise ValueError("zeta_j must be a finite 2-vector")


@dataclass(frozen=True)
class DynamicParams:
    """Dynamic parameter vector in the lumped point-mass basis.

    zeta_y = [(m1+m2)*l1^2, m2*l2^2, m2*l1*l2, (m1+m2)*l1, m2*l2, fv1, fv2].

    Entries 1-3 parametrize the inertia and Coriolis matrices, 4-5 the
    gravity vector (the acceleration g multiplies them separately), 6-7 the
    viscous friction.  Physical instances satisfy zy1*zy2 >= zy3^2.
    """

    zeta_y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "zeta_y", np.asarray(self.zeta_y, dtype=float))
        if self.zeta_y.shape != (7,) or not np.all(np.isfinite(self.zeta_y)):
            raise ValueError("zeta_y must be a finite 7-vector")


@dataclass
class DynamicsEval:
    """Inertia matrix, Coriolis matrix, gravity and friction torques."""

    M: np.ndarray
    C: np.ndarray
    G: np.ndarray
    f: np.ndarray


def true_dynamic_params(rp: RobotParams) -> DynamicParams:
    """Map physical parameters to the lumped 7-vector of `DynamicParams`."""
    return DynamicParams(np.array([
        (rp.m1 + rp.m2) * rp.l1 ** 2,
        rp.m2 * rp.l2 ** 2,
        rp.m2 * rp.l1 * rp.l2,
        (rp.m1 + rp.m2) * rp.l1,
        rp.m2 * rp.l2,
        rp.fv1,
        rp.fv2,
    ]))


def dynamics_eval(js: JointState, zy: DynamicParams, g: float = GRAVITY) -> DynamicsEval:
    """Evaluate M, C, G, f at a joint state.

    M = [[a1+a2+2*a3*c2, a2+a3*c2], [a2+a3*c2, a2]] with (a1,a2,a3) the
    first three lumped parameters; C is built from Christoffel symbols so
    that dM/dt - 2C is skew-symmetric by construction.
    """
    a1, a2, a3, p4, p5, fv1, fv2 = zy.zeta_y
    th1, th2 = js.theta
    w1, w2 = js.theta_dot
    c2 = math.cos(th2)
    s2 = math.sin(th2)
    c1 = math.cos(th1)
    c12 = math.cos(th1 + th2)

    M = np.array([[a1 + a2 + 2.0 * a3 * c2, a2 + a3 * c2],
                  [a2 + a3 * c2, a2]])
    C = np.array([[-a3 * s2 * w2, -a3 * s2 * (w1 + w2)],
                  [a3 * s2 * w1, 0.0]])
    G = g * np.array([p4 * c1 + p5 * c12, p5 * c12])
    f = np.array([fv1 * w1, fv2 * w2])
    return DynamicsEval(M=M, C=C, G=G, f=f)


def forward_dynamics(js: JointState, tau: np.ndarray, zy: DynamicParams,
                     g: float = GRAVITY) -> np.ndarray:
    """Joint accelerations from torque: theta_ddot = M^-1 (tau - C w - f - G)."""
    tau = np.asarray(tau, dtype=float)
    if not np.all(np.isfinite(tau)):
        raise ValueError("torque must be finite")
    acc = _accel(js.theta[0], js.theta[1], js.theta_dot[0], js.theta_dot[1],
                 tau[0], tau[1], tuple(zy.zeta_y), g)
    return np.array(acc)


def _accel(th1: float, th2: float, w1: float, w2: float,
           tau1: float, tau2: float, zy: tuple, g: float) -> tuple:
    """Scalar fast path shared with the plant integrator."""
    a1, a2, a3, p4, p5, fv1, fv2 = zy
    c2 = math.cos(th2)
    s2 = math.sin(th2)
    m11 = a1 + a2 + 2.0 * a3 * c2
    m12 = a2 + a3 * c2
    m22 = a2
    h = a3 * s2
    r1 = tau1 + h * w2 * w1 + h * (w1 + w2) * w2 - fv1 * w1 \
        - g * (p4 * math.cos(th1) + p5 * math.cos(th1 + th2))
    r2 = tau2 - h * w1 * w1 - fv2 * w2 - g * p5 * math.cos(th1 + th2)
    det = m11 * m22 - m12 * m12
    return ((m22 * r1 - m12 * r2) / det, (m11 * r2 - m12 * r1) / det)


def forward_kinematics(theta: np.ndarray, zj: KinematicParams) -> np.ndarray:
    """End-effector position p = [l1*c1 + l2*c12, l1*s1 + l2*s12]."""
    l1, l2 = zj.zeta_j
    th1, th2 = theta[0], theta[1]
    return np.array([l1 * math.cos(th1) + l2 * math.cos(th1 + th2),
                     l1 * math.sin(th1) + l2 * math.sin(th1 + th2)])


def jacobian(theta: np.ndarray, zj: KinematicParams) -> np.ndarray:
    """Velocity Jacobian of `forward_kinematics`; det = l1*l2*sin(theta2)."""
    l1, l2 = zj.zeta_j
    th1, th2 = theta[0], theta[1]
    s1 = math.sin(th1)
    c1 = math.cos(th1)
    s12 = math.sin(th1 + th2)
    c12 = math.cos(th1 + th2)
    return np.array([[-l1 * s1 - l2 * s12, -l2 * s12],
                     [l1 * c1 + l2 * c12, l2 * c12]])


def jacobian_time_derivative(js: JointState, zj: KinematicParams,
                             zj_dot: np.ndarray) -> np.ndarray:
    """Total time derivative of the Jacobian.

    Includes both the configuration rate (d J/d theta * theta_dot) and the
    parameter rate (d J/d zeta_j * zj_dot); the latter matters when the
    Jacobian is built from an evolving length estimate.  Pass zj_dot = 0 to
    recover the fixed-parameter derivative.
    """
    l1, l2 = zj.zeta_j
    dl1, dl2 = float(zj_dot[0]), float(zj_dot[1])
    th1, th2 = js.theta
    w1 = js.theta_dot[0]
    ws = js.theta_dot[0] + js.theta_dot[1]
    s1 = math.sin(th1)
    c1 = math.cos(th1)
    s12 = math.sin(th1 + th2)
    c12 = math.cos(th1 + th2)
    return np.array([
        [-l1 * c1 * w1 - l2 * c12 * ws - dl1 * s1 - dl2 * s12,
         -l2 * c12 * ws - dl2 * s12],
        [-l1 * s1 * w1 - l2 * s12 * ws + dl1 * c1 + dl2 * c12,
         -l2 * s12 * ws + dl2 * c12],
    ])


def kinematic_regressor(js: JointState) -> np.ndarray:
    """Regressor W_j with W_j @ [l1, l2] = J_p(theta) @ theta_dot exactly."""
    th1, th2 = js.theta
    w1 = js.theta_dot[0]
    ws = js.theta_dot[0] + js.theta_dot[1]
    return np.array([[-math.sin(th1) * w1, -math.sin(th1 + th2) * ws],
                     [math.cos(th1) * w1, math.cos(th1 + th2) * ws]])


def sigma_min_2x2(J: np.ndarray) -> float:
    """Smallest singular value of a 2x2 matrix, closed form."""
    det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
    fro2 = J[0, 0] ** 2 + J[0, 1] ** 2 + J[1, 0] ** 2 + J[1, 1] ** 2
    disc = max(fro2 * fro2 - 4.0 * det * det, 0.0)
    return math.sqrt(max(0.5 * (fro2 - math.sqrt(disc)), 0.0))


def regularized_inverse(J: np.ndarray, sigma_hard: float | None = None):
    """Inverse of a 2x2 Jacobian with a damped fallback near singularity.

    Returns (inverse, damped_flag).  While sigma_min(J) >= SIGMA_SOFT the
    exact inverse is returned; below, the damped form
    J^T (J J^T + lambda I)^-1 with lambda ramping from 0 at the switch to
    LAMBDA_MAX at a fully singular configuration, which keeps the inverse
    continuous and its gain bounded.  When sigma_hard is given and
    sigma_min < sigma_hard, raises JacobianSingularError instead.
    """
    smin = sigma_min_2x2(J)
    if smin >= SIGMA_SOFT:
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        inv = np.array([[J[1, 1], -J[0, 1]], [-J[1, 0], J[0, 0]]]) / det
        return inv, False
    if sigma_hard is not None and smin < sigma_hard:
        raise JacobianSingularError(
            f"sigma_min(J) = {smin:.3e} below hard floor {sigma_hard:.1e}")
    lam = LAMBDA_MAX * (1.0 - (smin / SIGMA_SOFT) ** 2)
    jjt = J @ J.T
    jjt[0, 0] += lam
    jjt[1, 1] += lam
    a, b, c, d = jjt[0, 0], jjt[0, 1], jjt[1, 0], jjt[1, 1]
    det = a * d - b * c
    jjt_inv = np.array([[d, -b], [-c, a]]) / det
    return J.T @ jjt_inv, True


def reference_acceleration_delayed(js: JointState, zj_hat: KinematicParams,
                                   zj_hat_dot: np.ndarray, delayed: TaskPoint,
                                   e_pT: np.ndarray, e_pT_dot: np.ndarray,
                                   phi_T: np.ndarray, k1: float) -> np.ndarray:
    """Reference joint acceleration from delayed task-space signals.

    Differentiates Jhat^-1 (pdot_hT + k1 * phi_T * e_pT) in time, using
    d/dt Jhat^-1 = -Jhat^-1 dJhat/dt Jhat^-1 and the closed form
    d/dt(phi_i e_i) = phi_i edot_i (1 + 2 e_i^2 phi_i) of the barrier
    weight rate.  zj_hat_dot carries the estimate rate into dJhat/dt.
    """
    jhat = jacobian(js.theta, zj_hat)
    jinv, _ = regularized_inverse(jhat, sigma_hard=SIGMA_HARD)
    jdot = jacobian_time_derivative(js, zj_hat, zj_hat_dot)
    phi = np.diag(phi_T)
    v = delayed.p_dot + k1 * phi * e_pT
    dphie = phi * e_pT_dot * (1.0 + 2.0 * e_pT ** 2 * phi)
    return -jinv @ (jdot @ (jinv @ v)) + jinv @ (delayed.p_ddot + k1 * dphie)


def dynamic_regressor_delayed(js: JointState, a_T: np.ndarray, eta_T: np.ndarray,
                              g: float = GRAVITY) -> np.ndarray:
    """Dynamic regressor W such that W @ zeta_y = M a_T + C(w + eta_T) + f + G.

    Columns follow the `DynamicParams` basis: 1-3 inertia/Coriolis, 4-5
    gravity, 6-7 friction.
    """
    th1, th2 = js.theta
    w1, w2 = js.theta_dot
    c2 = math.cos(th2)
    s2 = math.sin(th2)
    c1 = math.cos(th1)
    c12 = math.cos(th1 + th2)
    v1, v2 = a_T[0], a_T[1]
    u1 = w1 + eta_T[0]
    u2 = w2 + eta_T[1]
    w = np.zeros((2, 7))
    w[0, 0] = v1
    w[0, 1] = v1 + v2
    w[1, 1] = v1 + v2
    w[0, 2] = 2.0 * c2 * v1 + c2 * v2 - s2 * w2 * u1 - s2 * (w1 + w2) * u2
    w[1, 2] = c2 * v1 + s2 * w1 * u1
    w[0, 3] = g * c1
    w[0, 4] = g * c12
    w[1, 4] = g * c12
    w[0, 5] = w1
    w[1, 6] = w2
    return w


def inverse_kinematics(p: np.ndarray, zj: KinematicParams, elbow: str = "up") -> np.ndarray:
    """Joint angles reaching Cartesian point p, on the requested elbow branch.

    elbow selects the sign of theta2: "up" gives theta2 >= 0, "down"
    theta2 <= 0.  Raises WorkspaceError outside the reachable annulus
    |l1 - l2| <= |p| <= l1 + l2.
    """
    if elbow not in ("up", "down"):
        raise ValueError("elbow must be 'up' or 'down'")
    l1, l2 = zj.zeta_j
    x, y = float(p[0]), float(p[1])
    r2 = x * x + y * y
    c2 = (r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2)
    tol = 1e-12 * max(1.0, l1 + l2)
    if c2 > 1.0 + tol or c2 < -1.0 - tol:
        raise WorkspaceError(
            f"target {p!r} outside reachable annulus [{abs(l1 - l2):.6g}, {l1 + l2:.6g}]")
    c2 = min(1.0, max(-1.0, c2))
    th2 = math.acos(c2)
    if elbow == "down":
        th2 = -th2
    th1 = math.atan2(y, x) - math.atan2(l2 * math.sin(th2), l1 + l2 * math.cos(th2))
    return np.array([th1, th2])
