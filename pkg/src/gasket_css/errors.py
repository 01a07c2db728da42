"""Exception hierarchy shared by all modules."""


class GasketError(Exception):
    """Base class for every error raised by this package."""


class GeometryError(GasketError):
    """A geometric construction left the representable part of the gasket."""


class WindowTooSmall(GeometryError):
    pass


class PointOutsideWindow(GeometryError):
    pass


class BallNotCovered(GeometryError):
    """The inner ball is not contained in the cell neighborhood chosen for it."""


class DomainError(GasketError):
    """A function was evaluated outside the set where it is defined."""


class DepthTooShallow(GasketError):
    pass


class StabilizationFailure(GasketError):
    """Internal consistency check on an exact energy value failed."""


class DegenerateFunction(GasketError):
    pass
