"""Exception types shared across the package."""


class DinoiserError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(DinoiserError, ValueError):
    """An argument violates a documented precondition."""


class DegenerateInputError(DinoiserError, ValueError):
    """Numerically degenerate input (e.g. a zero-norm feature row)."""


class WeightLoadError(DinoiserError, IOError):
    """Weight container is missing, corrupt, or inconsistent with its handle."""


class NotFoundError(DinoiserError, FileNotFoundError):
    """A required external artifact (mask, image, split entry) is missing."""


class IncompatibleCheckpointError(DinoiserError, IOError):
    """Checkpoint file cannot be used: truncated, wrong version, or wrong metadata."""


class UndefinedMetricError(DinoiserError, ArithmeticError):
    """Metric is undefined for the given inputs (e.g. mIoU with no observed classes)."""
