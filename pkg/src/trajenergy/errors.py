"""Exception hierarchy shared by every trajenergy module."""


class TrajEnergyError(Exception):
    """Base class for all library errors."""


class ParseError(TrajEnergyError):
    """A configuration file could not be read or decoded."""


class ValidationError(TrajEnergyError, ValueError):
    """A value violates a model, trajectory or scene invariant."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DimensionError(TrajEnergyError, ValueError):
    """Vector or matrix dimensions do not match the robot model."""


class TooFewTrajectories(DimensionError):
    pass


class DegenerateInterval(TrajEnergyError, ValueError):
    """A time interval has non-positive length."""


class OutOfRange(TrajEnergyError, ValueError):
    """A query time lies outside a trajectory's domain."""


class TooFewWaypoints(TrajEnergyError, ValueError):
    pass


class NonMonotonicTimes(TrajEnergyError, ValueError):
    pass


class TooFewSamples(TrajEnergyError, ValueError):
    pass


class LengthMismatch(TrajEnergyError, ValueError):
    pass


class SeriesTooShort(TrajEnergyError, ValueError):
    pass


class FlatSeries(SeriesTooShort):
    """The series carries no oscillation to measure."""


class PenetrationError(TrajEnergyError):
    """A check point lies on or inside an obstacle surface."""

    def __init__(self, message: str, obstacle: int | None = None, frame: int | None = None):
        self.obstacle = obstacle
        self.frame = frame
        super().__init__(message)


class EndpointBlocked(TrajEnergyError):
    """A pinned trajectory endpoint violates the clearance target."""
