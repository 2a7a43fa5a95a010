"""Exception types shared across the package."""


class BisysError(Exception):
    """Base class. ``exit_code`` is what the command line reports."""

    exit_code = 3


class InputError(BisysError):
    exit_code = 2


class InvalidPresentation(InputError):
    pass


class EmptySubshift(InputError):
    pass


class ExactnessUnavailable(InputError):
    pass


class ApproximationRequired(InputError):
    pass


class WordNotInP(InputError):
    pass


class NoSquare(InputError):
    pass


class DepthExhausted(InputError):
    pass


class ScheduleNotChained(InputError):
    pass


class InconsistentBisystem(BisysError):
    pass


class AmbiguousSquares(BisysError):
    pass


class PartitionViolation(BisysError):
    pass
