"""Safe task-space synchronization simulator for a planar two-link arm.

A deterministic closed-loop simulator and library: a ground-truth
Euler-Lagrange plant, a barrier-weighted adaptive synchronization
controller driven by a time-delayed reference trajectory, an integral
learning stack for the kinematic parameters, and post-hoc diagnostics.
"""

__version__ = "0.1.0"

from .control import BarrierBounds, ControlOutput, Gains, compute_control
from .icl import ExcitationReport, IclStack, IclWindow
from .robot import (DynamicParams, DynamicsEval, JointState, KinematicParams,
                    RobotParams)
from .sim import LogRecord, RunResult, RunSummary, SimConfig, SimState, run
from .trajectory import CircleTrajectory, DelayLine, TabulatedTrajectory, TaskPoint

__all__ = [
    "BarrierBounds", "CircleTrajectory", "ControlOutput", "DelayLine",
    "DynamicParams", "DynamicsEval", "ExcitationReport", "Gains", "IclStack",
    "IclWindow", "JointState", "KinematicParams", "LogRecord", "RobotParams",
    "RunResult", "RunSummary", "SimConfig", "SimState", "TabulatedTrajectory",
    "TaskPoint", "compute_control", "run",
]
