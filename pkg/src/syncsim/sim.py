"""Closed-loop fixed-step simulation of plant, controller, and estimators.

One control step at rate 1/dt: sample the delayed reference, form the
barrier-weighted errors and torque (held over the step), integrate the
plant with a classical 4th-order one-step method on sub-intervals, then
advance both parameter estimates by explicit first-order updates and push
the new sample into the learning stack and delay line.  Everything is
deterministic; identical configurations produce identical logs.
"""

from __future__ import annotations

import time as _time
from dataclasses import dataclass, field

import numpy as np

from . import robot as rb
from .control import (BarrierBounds, Gains, barrier_weights, compute_control,
                      eta_current, sync_error_delayed)
from .diagnostics import blf_value
from .errors import (BarrierViolationError, JacobianSingularError,
                     NumericFailureError)
from .icl import IclStack, zeta_j_derivative
from .robot import JointState, KinematicParams
from .trajectory import CircleTrajectory, DelayLine


@dataclass
class SimConfig:
    """Full description of one run."""

    robot: rb.RobotParams
    gains: Gains
    bounds: BarrierBounds
    trajectory: CircleTrajectory
    duration: float = 50.0
    dt: float = 0.01
    plant_substeps: int = 4
    zeta_j0: np.ndarray = field(default_factory=lambda: np.array([0.5, 0.25]))
    zeta_y0: np.ndarray = field(default_factory=lambda: np.zeros(7))
    p0: np.ndarray = field(default_factory=lambda: np.array([0.78, 0.23]))
    elbow: str = "up"
    seed: int = 0  # reserved; nothing stochastic yet
    jdot_uses_estimate_rate: bool = True
    lambda_threshold: float = 1e-4

    def __post_init__(self):
        self.zeta_j0 = np.asarray(self.zeta_j0, dtype=float)
        self.zeta_y0 = np.asarray(self.zeta_y0, dtype=float)
        self.p0 = np.asarray(self.p0, dtype=float)
        if self.dt <= 0.0:
            raise ValueError("dt must be > 0")
        if self.duration < 0.0:
            raise ValueError("duration must be >= 0")
        if self.plant_substeps < 1:
            raise ValueError("plant_substeps must be >= 1")
        if np.any(np.abs(self.p0) >= self.bounds.k_r_bound):
            raise ValueError("p0 must lie within the end-effector bounds k_r_bound")


@dataclass
class SimState:
    """Mutable state of one run."""

    js: JointState
    zeta_j_hat: np.ndarray
    zeta_y_hat: np.ndarray
    delay_line: DelayLine
    icl: IclStack
    step_index: int = 0


@dataclass
class LogRecord:
    """Per-step snapshot of every logged signal."""

    t: float
    theta: np.ndarray
    theta_dot: np.ndarray
    p: np.ndarray
    p_h: np.ndarray
    p_hT: np.ndarray
    e_p: np.ndarray
    e_pT: np.ndarray
    eta: np.ndarray
    eta_T: np.ndarray
    tau: np.ndarray
    zeta_j_hat: np.ndarray
    zeta_y_hat: np.ndarray
    norm_e_p: float
    norm_e_pT: float
    v1: float
    lambda_min: float
    constraint_margin: np.ndarray


@dataclass
class RunSummary:
    """Aggregates of a finished (or terminated) run."""

    termination: str
    steps: int
    t_end: float
    final_norm_e_p: float
    final_norm_e_pT: float
    peak_norm_e_p: float
    peak_norm_e_pT: float
    min_constraint_margin: np.ndarray
    zeta_j_final: np.ndarray
    t_first_excited: float | None
    damped_inverse_events: int
    wall_clock_s: float


@dataclass
class RunResult:
    """Log, summary, and the excitation trace (t, lambda_min, window_count)."""

    records: list[LogRecord]
    summary: RunSummary
    excitation: list[tuple[float, float, int]]


def init(cfg: SimConfig) -> SimState:
    """Initial state: arm at p0 (via inverse kinematics) and at rest.

    The delay line and learning stack are primed with the t = 0 sample.
    Raises WorkspaceError for unreachable p0 and BarrierViolationError if
    the initial synchronization error already violates the bounds.
    """
    zj_true = KinematicParams(np.array([cfg.robot.l1, cfg.robot.l2]))
    theta0 = rb.inverse_kinematics(cfg.p0, zj_true, cfg.elbow)
    js = JointState(theta=theta0, theta_dot=np.zeros(2), t=0.0)
    dl = DelayLine(cfg.gains.delay)
    tp0 = cfg.trajectory.eval(0.0)
    dl.push(0.0, tp0)
    stack = IclStack(cfg.gains.n_windows, cfg.gains.delta_t, cfg.lambda_threshold)
    p_start = rb.forward_kinematics(theta0, zj_true)
    stack.push_sample(0.0, p_start, rb.kinematic_regressor(js))
    e0 = sync_error_delayed(p_start, tp0.p)
    if np.any(np.abs(e0) >= cfg.bounds.k_m):
        raise BarrierViolationError(f"initial error {e0} outside k_m = {cfg.bounds.k_m}")
    return SimState(js=js, zeta_j_hat=cfg.zeta_j0.copy(), zeta_y_hat=cfg.zeta_y0.copy(),
                    delay_line=dl, icl=stack)


def _integrate_plant(theta: np.ndarray, theta_dot: np.ndarray, tau: np.ndarray,
                     zy: tuple, g: float, dt: float, substeps: int):
    """RK4 on (theta, theta_dot) under a held torque, split into substeps."""
    th1, th2 = theta[0], theta[1]
    w1, w2 = theta_dot[0], theta_dot[1]
    tau1, tau2 = tau[0], tau[1]
    h = dt / substeps
    for _ in range(substeps):
        a1, b1 = rb._accel(th1, th2, w1, w2, tau1, tau2, zy, g)
        k1 = (w1, w2, a1, b1)
        a2, b2 = rb._accel(th1 + 0.5 * h * k1[0], th2 + 0.5 * h * k1[1],
                           w1 + 0.5 * h * k1[2], w2 + 0.5 * h * k1[3], tau1, tau2, zy, g)
        k2 = (w1 + 0.5 * h * k1[2], w2 + 0.5 * h * k1[3], a2, b2)
        a3, b3 = rb._accel(th1 + 0.5 * h * k2[0], th2 + 0.5 * h * k2[1],
                           w1 + 0.5 * h * k2[2], w2 + 0.5 * h * k2[3], tau1, tau2, zy, g)
        k3 = (w1 + 0.5 * h * k2[2], w2 + 0.5 * h * k2[3], a3, b3)
        a4, b4 = rb._accel(th1 + h * k3[0], th2 + h * k3[1],
                           w1 + h * k3[2], w2 + h * k3[3], tau1, tau2, zy, g)
        k4 = (w1 + h * k3[2], w2 + h * k3[3], a4, b4)
        th1 += h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0])
        th2 += h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1])
        w1 += h / 6.0 * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2])
        w2 += h / 6.0 * (k1[3] + 2.0 * k2[3] + 2.0 * k3[3] + k4[3])
    return np.array([th1, th2]), np.array([w1, w2])


class _StepScratch:
    """Per-run constants hoisted out of the step loop."""

    def __init__(self, cfg: SimConfig):
        self.zj_true = KinematicParams(np.array([cfg.robot.l1, cfg.robot.l2]))
        self.zy_true = tuple(rb.true_dynamic_params(cfg.robot).zeta_y)
        self.g = cfg.robot.g
        self.km = cfg.bounds.k_m
        self.damped_events = 0


def step(state: SimState, cfg: SimConfig, scratch: _StepScratch | None = None):
    """Advance one control step; returns (state, LogRecord).

    Raises BarrierViolationError when either synchronization error leaves
    its bound and NumericFailureError when the state stops being finite.
    """
    if scratch is None:
        scratch = _StepScratch(cfg)
    gains = cfg.gains
    t = state.step_index * cfg.dt
    js = state.js
    theta, theta_dot = js.theta, js.theta_dot
    if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(theta_dot))):
        raise NumericFailureError(f"non-finite joint state at t={t}")

    tp_now = cfg.trajectory.eval(t)
    tp_del = state.delay_line.delayed(t)
    p = rb.forward_kinematics(theta, scratch.zj_true)
    e_p = tp_now.p - p
    e_pT = sync_error_delayed(p, tp_del.p)
    if np.any(np.abs(e_p) >= scratch.km) or np.any(np.abs(e_pT) >= scratch.km):
        raise BarrierViolationError(
            f"t={t:.4f}: |e_p|={np.abs(e_p)}, |e_pT|={np.abs(e_pT)} vs k_m={scratch.km}")

    phi_T = barrier_weights(e_pT, cfg.bounds)
    zj_hat = KinematicParams(state.zeta_j_hat)
    jinv, damped = rb.regularized_inverse(rb.jacobian(theta, zj_hat))
    if damped:
        scratch.damped_events += 1
    w_j = rb.kinematic_regressor(js)
    zeta_j_dot = zeta_j_derivative(state.icl, w_j, phi_T, e_pT, state.zeta_j_hat, gains)
    zj_rate = zeta_j_dot if cfg.jdot_uses_estimate_rate else np.zeros(2)
    out = compute_control(js, p, tp_del, state.zeta_j_hat, state.zeta_y_hat,
                          zj_rate, cfg.bounds, gains, scratch.g)
    eta_T, tau, zeta_y_dot = out.eta_T, out.tau, out.zeta_y_dot

    # diagnostics-only signals (use current, undelayed reference)
    phi_now = barrier_weights(e_p, cfg.bounds)
    eta_now = eta_current(theta_dot, jinv, tp_now.p_dot, phi_now, e_p, gains.k_1)

    record = LogRecord(
        t=t, theta=theta.copy(), theta_dot=theta_dot.copy(), p=p,
        p_h=tp_now.p.copy(), p_hT=tp_del.p.copy(), e_p=e_p, e_pT=e_pT,
        eta=eta_now, eta_T=eta_T, tau=tau,
        zeta_j_hat=state.zeta_j_hat.copy(), zeta_y_hat=state.zeta_y_hat.copy(),
        norm_e_p=float(np.hypot(e_p[0], e_p[1])),
        norm_e_pT=float(np.hypot(e_pT[0], e_pT[1])),
        v1=blf_value(e_p, cfg.bounds),
        lambda_min=state.icl.lambda_min,
        constraint_margin=scratch.km - np.abs(e_p),
    )

    try:
        theta_new, theta_dot_new = _integrate_plant(theta, theta_dot, tau, scratch.zy_true,
                                                    scratch.g, cfg.dt, cfg.plant_substeps)
    except (ValueError, OverflowError) as exc:  # trig overflow on a diverging state
        raise NumericFailureError(f"plant integration diverged at t={t}: {exc}") from None
    if not (np.all(np.isfinite(theta_new)) and np.all(np.isfinite(theta_dot_new))):
        raise NumericFailureError(f"plant integration diverged at t={t}")
    state.zeta_j_hat = state.zeta_j_hat + cfg.dt * zeta_j_dot
    state.zeta_y_hat = state.zeta_y_hat + cfg.dt * zeta_y_dot
    if not (np.all(np.isfinite(state.zeta_j_hat)) and np.all(np.isfinite(state.zeta_y_hat))):
        raise NumericFailureError(f"parameter update diverged at t={t}")

    state.step_index += 1
    t_next = state.step_index * cfg.dt
    state.js = JointState(theta=theta_new, theta_dot=theta_dot_new, t=t_next)
    p_next = rb.forward_kinematics(theta_new, scratch.zj_true)
    state.icl.push_sample(t_next, p_next, rb.kinematic_regressor(state.js))
    state.delay_line.push(t_next, cfg.trajectory.eval(t_next))
    return state, record


def run(cfg: SimConfig) -> RunResult:
    """Run duration/dt steps (or fewer on termination) and summarize."""
    t0 = _time.perf_counter()
    state = init(cfg)
    scratch = _StepScratch(cfg)
    n_steps = round(cfg.duration / cfg.dt)
    records: list[LogRecord] = []
    excitation: list[tuple[float, float, int]] = []
    termination = "completed"
    for _ in range(n_steps):
        try:
            state, rec = step(state, cfg, scratch)
        except BarrierViolationError:
            termination = "barrier_violation"
            break
        except (NumericFailureError, JacobianSingularError):
            termination = "numeric_failure"
            break
        records.append(rec)
        # stack state after this step's push, timestamped at the new sample
        excitation.append((state.js.t, state.icl.lambda_min, state.icl.window_count))
    wall = _time.perf_counter() - t0
    summary = _summarize(cfg, state, records, termination, scratch, wall)
    return RunResult(records=records, summary=summary, excitation=excitation)


def _summarize(cfg, state, records, termination, scratch, wall) -> RunSummary:
    if records:
        norm_e_p = np.array([r.norm_e_p for r in records])
        norm_e_pT = np.array([r.norm_e_pT for r in records])
        margins = np.array([r.constraint_margin for r in records])
        final_e_p = float(norm_e_p[-1])
        final_e_pT = float(norm_e_pT[-1])
        peak_e_p = float(norm_e_p.max())
        peak_e_pT = float(norm_e_pT.max())
        min_margin = margins.min(axis=0)
        t_end = records[-1].t + cfg.dt
    else:
        final_e_p = final_e_pT = peak_e_p = peak_e_pT = float("nan")
        min_margin = np.full(2, np.nan)
        t_end = 0.0
    return RunSummary(
        termination=termination,
        steps=len(records),
        t_end=t_end,
        final_norm_e_p=final_e_p,
        final_norm_e_pT=final_e_pT,
        peak_norm_e_p=peak_e_p,
        peak_norm_e_pT=peak_e_pT,
        min_constraint_margin=min_margin,
        zeta_j_final=state.zeta_j_hat.copy(),
        t_first_excited=state.icl.t_first_excited,
        damped_inverse_events=scratch.damped_events,
        wall_clock_s=wall,
    )
