"""Exception hierarchy shared by all modules."""


class QusError(Exception):
    """Base class for every error raised by this package."""


class SpaceError(QusError):
    """A point, event or map does not belong to the space it claims."""


class CapExceeded(QusError):
    """A constructed space would exceed the configured cardinality cap."""

    def __init__(self, size, cap):
        self.size = size
        self.cap = cap
        super().__init__(f"space of {size} points exceeds cardinality cap {cap}")


class DistributionError(QusError):
    """Weights are negative, misshapen, or do not sum to one."""


class ShapeMismatch(QusError):
    """Domains and codomains of composed objects do not line up."""


class GraphError(QusError):
    """Malformed graph: cycles, edges into inputs, unknown nodes."""


class NotDeterministic(QusError):
    """A kernel was required to be 0-1-deterministic but is not."""


class DrawReuseError(QusError):
    """The same entropy draw was consumed twice inside an audited evaluation."""
