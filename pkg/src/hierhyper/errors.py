"""Exception types raised across the package."""


class InvalidDimensionError(ValueError):
    pass


class IndexOutOfBoundsError(IndexError):
    """A coordinate falls outside the matrix dimensions.

    ``position`` is the offending triple's index within its batch, or None
    for single-coordinate lookups.
    """

    def __init__(self, message, position=None):
        super().__init__(message)
        self.position = position


class ShapeError(ValueError):
    pass


class ValueOverflowError(OverflowError):
    """Signed 64-bit accumulation overflowed."""


class ScheduleError(ValueError):
    pass


class FormatError(ValueError):
    """Malformed edge file. ``offset`` is the byte offset of the problem."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


class WorkloadError(ValueError):
    pass


class LaunchError(RuntimeError):
    def __init__(self, message, worker_index):
        super().__init__(message)
        self.worker_index = worker_index
