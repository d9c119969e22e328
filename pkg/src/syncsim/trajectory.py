"""Reference hand trajectory sources, bound checking, and the delay line."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DelayLineEmptyError, TimeOrderError


@dataclass(frozen=True)
class TaskPoint:
    """Cartesian position, velocity and acceleration of the tracked hand."""

    p: np.ndarray
    p_dot: np.ndarray
    p_ddot: np.ndarray

    def __post_init__(self):
        for name in ("p", "p_dot", "p_ddot"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))


@dataclass(frozen=True)
class CircleTrajectory:
    """Elliptic hand path p(t) = center + [r1 cos(w t), r2 sin(w t)]."""

    center: np.ndarray
    radius: np.ndarray
    omega: float

    def __post_init__(self):
        object.__setattr__(self, "center", np.asarray(self.center, dtype=float))
        object.__setattr__(self, "radius", np.asarray(self.radius, dtype=float))
        if np.any(self.radius < 0.0):
            raise ValueError("radius entries must be >= 0")

    def eval(self, t: float) -> TaskPoint:
        if t < 0.0:
            raise ValueError("t must be >= 0")
        w = self.omega
        cx, cy = self.center
        rx, ry = self.radius
        c = np.cos(w * t)
        s = np.sin(w * t)
        return TaskPoint(
            p=np.array([cx + rx * c, cy + ry * s]),
            p_dot=np.array([-rx * w * s, ry * w * c]),
            p_ddot=np.array([-rx * w * w * c, -ry * w * w * s]),
        )


class TabulatedTrajectory:
    """Trajectory replayed from a plain-text table.

    Columns: t, px, py, vx, vy, ax, ay with strictly increasing t.  Lines
    starting with '#' are ignored.  eval() interpolates all columns
    linearly and clamps outside the tabulated range.
    """

    def __init__(self, t: np.ndarray, data: np.ndarray):
        t = np.asarray(t, dtype=float)
        data = np.asarray(data, dtype=float)
        if t.ndim != 1 or data.shape != (t.size, 6):
            raise ValueError("expected t (n,) and data (n, 6)")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("timestamps must be strictly increasing")
        self._t = t
        self._data = data

    @classmethod
    def from_file(cls, path: str | Path) -> "TabulatedTrajectory":
        raw = np.loadtxt(path, comments="#", delimiter=None, ndmin=2)
        if raw.shape[1] != 7:
            raise ValueError("expected 7 columns: t, px, py, vx, vy, ax, ay")
        return cls(raw[:, 0], raw[:, 1:])

    def eval(self, t: float) -> TaskPoint:
        cols = [np.interp(t, self._t, self._data[:, j]) for j in range(6)]
        return TaskPoint(p=np.array(cols[0:2]), p_dot=np.array(cols[2:4]),
                         p_ddot=np.array(cols[4:6]))


class DelayLine:
    """Time-ordered buffer serving linearly interpolated delayed samples.

    Queries before the first stored timestamp are clamped to the first
    sample (the whole task point, derivatives included), mirroring the
    max(t - T, 0) convention of the learning-stack integrals.

    Each push prunes samples older than one delay behind the newest
    timestamp, so queries must not lag the newest push by more than the
    configured delay (the closed-loop pattern: query at t, then push
    t + dt).
    """

    def __init__(self, delay: float):
        if delay < 0.0:
            raise ValueError("delay must be >= 0")
        self.delay = delay
        self._t: deque[float] = deque()
        self._tp: deque[TaskPoint] = deque()

    def __len__(self) -> int:
        return len(self._t)

    def push(self, t: float, tp: TaskPoint) -> None:
        if self._t and t <= self._t[-1]:
            raise TimeOrderError(f"push at t={t} after t={self._t[-1]}")
        self._t.append(float(t))
        self._tp.append(tp)
        # keep one sample at or before the oldest future query target
        target = t - self.delay
        while len(self._t) >= 2 and self._t[1] <= target:
            self._t.popleft()
            self._tp.popleft()

    def delayed(self, t: float) -> TaskPoint:
        if not self._t:
            raise DelayLineEmptyError("delay line has no samples")
        target = max(t - self.delay, 0.0)
        if target <= self._t[0]:
            return self._tp[0]
        if target >= self._t[-1]:
            return self._tp[-1]
        for i in range(len(self._t) - 1):
            t0, t1 = self._t[i], self._t[i + 1]
            if t0 <= target <= t1:
                w = (target - t0) / (t1 - t0)
                a, b = self._tp[i], self._tp[i + 1]
                return TaskPoint(
                    p=(1.0 - w) * a.p + w * b.p,
                    p_dot=(1.0 - w) * a.p_dot + w * b.p_dot,
                    p_ddot=(1.0 - w) * a.p_ddot + w * b.p_ddot,
                )
        raise AssertionError("unreachable: target inside sample range")


def verify_bounds(tp: TaskPoint, k_h: np.ndarray) -> np.ndarray:
    """Per-axis margin k_h_i - |p_i|; negative entries flag a violation."""
    k_h = np.asarray(k_h, dtype=float)
    if np.any(k_h <= 0.0):
        raise ValueError("k_h must be positive")
    return k_h - np.abs(tp.p)
