"""Exception types raised across the package."""


class RallNetError(Exception):
    """Base class for all package errors."""


class GenerationFailed(RallNetError):
    pass


class InvalidPath(RallNetError):
    pass


class Unreachable(RallNetError):
    pass


class UnknownAlgorithm(RallNetError, ValueError):
    pass


class TooLarge(RallNetError):
    pass


class RoutesIncomplete(RallNetError):
    pass


class NoTraffic(RallNetError):
    """Raised by metrics that are undefined when no packet was generated."""


class Undefined(RallNetError, ValueError):
    """Raised by the Jain index when every load is zero."""
