"""Exception hierarchy shared by every module of the package."""


class UICError(Exception):
    """Base class for all errors raised by :mod:`uic`."""


class DomainError(UICError, ValueError):
    """An argument lies outside the set on which an operation is defined."""


class SpaceMismatch(UICError, TypeError):
    """Points from different metric spaces were combined."""


class CenterMismatch(UICError, ValueError):
    """A centered and an uncentered l1 point were combined."""


class EqualPoints(UICError, ValueError):
    """A pair index was requested for two identical points."""


class SingularInput(DomainError):
    """The closed form of a map is undefined at the given point."""


class NotSelfMap(UICError, ValueError):
    """A sampled image left the interval the map must preserve."""


class EscapedDomain(UICError, RuntimeError):
    """An iterate left the domain on which iteration is meaningful."""

    def __init__(self, message, step=None, point=None):
        super().__init__(message)
        self.step = step
        self.point = point


class IndexOverflow(UICError, RuntimeError):
    """The milestone schedule exceeded the configured iteration budget."""


class EmptySampleSet(UICError, ValueError):
    """A condition check was asked to run on no samples."""


class SearchExhausted(UICError, RuntimeError):
    """A counterexample index search hit its cap without success."""
