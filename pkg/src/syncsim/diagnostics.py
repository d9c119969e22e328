"""Post-hoc analysis quantities: barrier function value, delay-interval
functionals, model-property residuals, and the analytic safe-set radius.

Nothing here feeds back into the control loop; these exist for audit and
plotting.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .control import BarrierBounds
from .robot import DynamicParams, JointState, KinematicParams, jacobian


@dataclass(frozen=True)
class DiagnosticsConfig:
    """Gains and horizons of the three delay-interval functionals.

    The horizons must exceed the signal delay for the functionals to carry
    their intended meaning; validate(delay) enforces that.
    """

    k_lk: np.ndarray = field(default_factory=lambda: np.ones(3))
    omega: np.ndarray = field(default_factory=lambda: np.full(3, 0.5))
    lambda_threshold: float = 1e-4

    def __post_init__(self):
        object.__setattr__(self, "k_lk", np.asarray(self.k_lk, dtype=float))
        object.__setattr__(self, "omega", np.asarray(self.omega, dtype=float))
        if np.any(self.k_lk <= 0.0) or np.any(self.omega <= 0.0):
            raise ValueError("k_lk and omega entries must be positive")

    def validate(self, delay: float) -> None:
        if np.any(self.omega <= delay):
            raise ValueError(f"omega = {self.omega} must exceed the delay {delay}")


@dataclass
class SignalHistory:
    """Uniformly sampled signals over one delay interval [t - T, t]."""

    t: np.ndarray
    p_h_dot: np.ndarray
    p_h_ddot: np.ndarray
    e_p: np.ndarray
    e_p_dot: np.ndarray
    k_m: np.ndarray


def blf_value(e_p: np.ndarray, bb: BarrierBounds) -> float:
    """Barrier function 0.5 sum log(k_m^2 / (k_m^2 - e^2)).

    Zero at zero error, strictly increasing in each |e_i|, and +inf at or
    beyond the bound (the returned infinity is the violation sentinel).
    """
    e = np.asarray(e_p, dtype=float)
    km = bb.k_m
    if np.any(np.abs(e) >= km):
        return float("inf")
    return float(0.5 * np.sum(np.log(km ** 2 / (km ** 2 - e ** 2))))


def _double_integral(t: np.ndarray, g: np.ndarray) -> float:
    """Nested trapezoid of int_{t0}^{t1} int_s^{t1} g(l) dl ds."""
    if t.size < 2:
        return 0.0
    dt_seg = np.diff(t)
    # inner(s) = int_s^{t_end} g dl, cumulative trapezoid from the right
    seg = 0.5 * dt_seg * (g[:-1] + g[1:])
    inner = np.concatenate([np.cumsum(seg[::-1])[::-1], [0.0]])
    return float(np.sum(0.5 * dt_seg * (inner[:-1] + inner[1:])))


def lk_functionals(history: SignalHistory, dc: DiagnosticsConfig):
    """The three delay-interval functionals (P1, P2, P3).

    P1 integrates the squared reference acceleration, P2 the squared rate
    of the barrier-weighted error phi(e_p) e_p, P3 the squared reference
    velocity, each as the nested double integral over the buffered window
    and scaled by k_lk_i * omega_i / 2.  The phi e_p rate uses the closed
    form phi_i edot_i (1 + 2 e_i^2 phi_i).
    """
    t = history.t
    km2 = history.k_m ** 2
    phi = 1.0 / (km2 - history.e_p ** 2)
    dphie = phi * history.e_p_dot * (1.0 + 2.0 * history.e_p ** 2 * phi)
    g1 = np.sum(history.p_h_ddot ** 2, axis=1)
    g2 = np.sum(dphie ** 2, axis=1)
    g3 = np.sum(history.p_h_dot ** 2, axis=1)
    p1 = 0.5 * dc.k_lk[0] * dc.omega[0] * _double_integral(t, g1)
    p2 = 0.5 * dc.k_lk[1] * dc.omega[1] * _double_integral(t, g2)
    p3 = 0.5 * dc.k_lk[2] * dc.omega[2] * _double_integral(t, g3)
    return p1, p2, p3


def history_from_records(records, bb: BarrierBounds, zj_true: KinematicParams,
                         delay: float, end_index: int | None = None,
                         source=None) -> SignalHistory:
    """Build a SignalHistory for the window [t_end - delay, t_end] of a log.

    Reference rates come from the trajectory source when given, else from
    central differences of the logged reference positions.  The error rate
    is rebuilt from the reference velocity and the ground-truth
    end-effector velocity J(theta) theta_dot (the simulation knows the
    true kinematics; the controller does not).  Early in a run, when less
    than one delay of history exists, the window is clamped at t = 0.
    """
    if end_index is None:
        end_index = len(records) - 1
    t_end = records[end_index].t
    t_lo = max(t_end - delay, records[0].t)
    first = next(i for i in range(end_index + 1) if records[i].t >= t_lo - 1e-12)
    rows = records[first:end_index + 1]
    n = len(rows)
    t = np.array([r.t for r in rows])
    p_h_dot = np.empty((n, 2))
    p_h_ddot = np.empty((n, 2))
    e_p = np.empty((n, 2))
    e_p_dot = np.empty((n, 2))
    if source is None:
        p_h = np.array([r.p_h for r in rows])
        p_h_dot[:] = np.gradient(p_h, t, axis=0)
        p_h_ddot[:] = np.gradient(p_h_dot, t, axis=0)
    else:
        for i, r in enumerate(rows):
            tp = source.eval(r.t)
            p_h_dot[i] = tp.p_dot
            p_h_ddot[i] = tp.p_ddot
    for i, r in enumerate(rows):
        e_p[i] = r.e_p
        e_p_dot[i] = p_h_dot[i] - jacobian(r.theta, zj_true) @ r.theta_dot
    return SignalHistory(t=t, p_h_dot=p_h_dot, p_h_ddot=p_h_ddot, e_p=e_p,
                         e_p_dot=e_p_dot, k_m=bb.k_m)


def skew_residual(js: JointState, zy: DynamicParams, x: np.ndarray) -> float:
    """Quadratic-form residual x^T (dM/dt - 2C) x with the analytic dM/dt.

    Zero up to roundoff for the Christoffel construction of C.
    """
    a3 = zy.zeta_y[2]
    th2 = js.theta[1]
    w1, w2 = js.theta_dot
    s2 = math.sin(th2)
    mdot = -a3 * s2 * w2 * np.array([[2.0, 1.0], [1.0, 0.0]])
    c = np.array([[-a3 * s2 * w2, -a3 * s2 * (w1 + w2)],
                  [a3 * s2 * w1, 0.0]])
    x = np.asarray(x, dtype=float)
    return float(x @ (mdot - 2.0 * c) @ x)


@dataclass
class SafeRadiusResult:
    """Evaluated safe-set radius; domain_ok is False where the exponent
    makes the square root non-real (the formula's sign convention admits
    that for positive inputs, which the caller should treat as a
    formula-domain issue rather than a runtime error)."""

    rho: float
    radius: np.ndarray
    domain_ok: bool


def safe_radius(v0: float, epsilon1: float, beta1: float, t: float,
                bb: BarrierBounds) -> SafeRadiusResult:
    """Radius k_m_i sqrt(1 - exp(-rho)) of the invariant error set.

    rho = -2 (v0 e^{-beta1 t} + (epsilon1/beta1)(1 - e^{-beta1 t})).
    Visualization only; never used for control.
    """
    if beta1 <= 0.0:
        raise ValueError("beta1 must be > 0")
    decay = math.exp(-beta1 * t)
    rho = -2.0 * (v0 * decay + (epsilon1 / beta1) * (1.0 - decay))
    arg = 1.0 - math.exp(-rho)
    if arg < 0.0:
        return SafeRadiusResult(rho=rho, radius=np.full(2, np.nan), domain_ok=False)
    return SafeRadiusResult(rho=rho, radius=bb.k_m * math.sqrt(arg), domain_ok=True)
