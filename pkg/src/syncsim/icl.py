"""Integral history stack and the learning-based kinematic update law.

The stack accumulates trapezoid integrals of the kinematic regressor over
consecutive, non-overlapping windows of fixed length.  Each finalized
window stores the exact end-effector displacement U over the window and
the integrated regressor Y, which satisfy U = Y zeta_j for the true
parameters up to quadrature error.  Oldest windows are evicted FIFO once
the stack holds n_windows entries.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .control import Gains
from .errors import TimeOrderError

_BOUNDARY_TOL = 1e-9


@dataclass(frozen=True)
class IclWindow:
    """One finalized integration window."""

    u: np.ndarray
    y: np.ndarray
    t_end: float


@dataclass
class ExcitationReport:
    """Smallest eigenvalue of sum(Y^T Y) and when it first crossed threshold."""

    lambda_min: float
    window_count: int
    t_first_excited: float | None


def _lambda_min_2x2(s: np.ndarray) -> float:
    """Closed-form smallest eigenvalue of a symmetric 2x2 matrix."""
    a, b, c = s[0, 0], s[0, 1], s[1, 1]
    lam = 0.5 * (a + c) - math.sqrt((0.5 * (a - c)) ** 2 + b * b)
    return max(lam, 0.0)


class IclStack:
    """FIFO stack of integral windows with an excitation monitor."""

    def __init__(self, n_windows: int, window_len: float, lambda_threshold: float = 1e-4):
        if n_windows < 1:
            raise ValueError("n_windows must be >= 1")
        if window_len <= 0.0:
            raise ValueError("window_len must be > 0")
        self.n_windows = n_windows
        self.window_len = window_len
        self.lambda_threshold = lambda_threshold
        self.windows: deque[IclWindow] = deque()
        self.t_first_excited: float | None = None
        self._t_prev: float | None = None
        self._w_prev: np.ndarray | None = None
        self._t_start = 0.0
        self._p_start: np.ndarray | None = None
        self._y_acc = np.zeros((2, 2))
        self._s = np.zeros((2, 2))
        self._lambda_min = 0.0

    @property
    def window_count(self) -> int:
        return len(self.windows)

    @property
    def lambda_min(self) -> float:
        return self._lambda_min

    def sum_yty(self) -> np.ndarray:
        return self._s.copy()

    def push_sample(self, t: float, p: np.ndarray, w_j: np.ndarray) -> None:
        """Accumulate one sample; finalize a window on crossing a boundary."""
        if self._t_prev is not None and t <= self._t_prev:
            raise TimeOrderError(f"sample at t={t} after t={self._t_prev}")
        p = np.asarray(p, dtype=float).copy()
        w_j = np.asarray(w_j, dtype=float).copy()
        if self._t_prev is None:
            self._t_start = float(t)
            self._p_start = p
        else:
            self._y_acc += 0.5 * (t - self._t_prev) * (self._w_prev + w_j)
        self._t_prev = float(t)
        self._w_prev = w_j
        if t >= self._t_start + self.window_len - _BOUNDARY_TOL:
            self._finalize(t, p)

    def _finalize(self, t: float, p: np.ndarray) -> None:
        y = self._y_acc.copy()
        self.windows.append(IclWindow(u=p - self._p_start, y=y, t_end=float(t)))
        self._s = self._s + y.T @ y
        if len(self.windows) > self.n_windows:
            old = self.windows.popleft()
            self._s = self._s - old.y.T @ old.y
        self._lambda_min = _lambda_min_2x2(self._s)
        if self.t_first_excited is None and self._lambda_min >= self.lambda_threshold:
            self.t_first_excited = float(t)
        self._t_start = float(t)
        self._p_start = p
        self._y_acc = np.zeros((2, 2))

    def icl_correction(self, zeta_j_hat: np.ndarray) -> np.ndarray:
        """sum_i Y_i^T (U_i - Y_i zeta_hat); zero for an empty stack."""
        out = np.zeros(2)
        for w in self.windows:
            out += w.y.T @ (w.u - w.y @ zeta_j_hat)
        return out

    def excitation(self, lambda_threshold: float | None = None) -> ExcitationReport:
        """Excitation summary; the first-crossing time uses the configured
        threshold recorded while pushing."""
        lam = self._lambda_min
        if lambda_threshold is not None and lambda_threshold != self.lambda_threshold:
            first = self.t_first_excited if lam >= lambda_threshold else None
        else:
            first = self.t_first_excited
        return ExcitationReport(lambda_min=lam, window_count=len(self.windows),
                                t_first_excited=first)


def zeta_j_derivative(stack: IclStack, w_j: np.ndarray, phi_T: np.ndarray,
                      e_pT: np.ndarray, zeta_j_hat: np.ndarray, g: Gains) -> np.ndarray:
    """Kinematic estimate rate: barrier-weighted gradient plus stack residual.

    zeta_j_dot = -Gamma1 W_j^T phi_T e_pT + k Gamma1 sum Y^T (U - Y zeta_hat).
    """
    grad = w_j.T @ (np.diag(phi_T) * e_pT)
    return g.gamma1 @ (g.k_icl * stack.icl_correction(zeta_j_hat) - grad)
