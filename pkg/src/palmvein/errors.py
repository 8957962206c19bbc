"""Exception hierarchy shared by the pipeline stages."""


class PalmVeinError(Exception):
    """Base class for every error raised by this package."""


class DecodeError(PalmVeinError, ValueError):
    """Image bytes could not be decoded."""


class ParameterError(PalmVeinError, ValueError):
    """An argument is outside its admissible range."""


class DimensionError(PalmVeinError, ValueError):
    """Array shapes do not agree with what an operation needs."""


class InsufficientDataError(PalmVeinError, ValueError):
    pass


class TrainingError(PalmVeinError, ValueError):
    pass


class ConvergenceError(PalmVeinError, RuntimeError):
    pass


class DatasetError(PalmVeinError):
    """A dataset directory or cache file could not be loaded."""
