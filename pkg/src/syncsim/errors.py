"""Exception types shared across the simulator library."""


class SyncSimError(Exception):
    """Base class for all library-specific errors."""


class WorkspaceError(SyncSimError):
    """Target point lies outside the reachable annulus of the arm."""


class JacobianSingularError(SyncSimError):
    """Estimated Jacobian is singular beyond what damping may safely hide."""


class BarrierViolationError(SyncSimError):
    """A barrier-weighted error reached or crossed its configured bound."""


class NumericFailureError(SyncSimError):
    """Simulation state became non-finite."""


class DelayLineEmptyError(SyncSimError):
    """Delayed sample requested before any sample was stored."""


class TimeOrderError(SyncSimError):
    """Samples pushed with non-increasing timestamps."""


class ConfigError(SyncSimError):
    """Configuration file or override is malformed or inconsistent."""
