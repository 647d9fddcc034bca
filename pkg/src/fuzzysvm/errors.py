"""Exception hierarchy shared by the package."""


class FuzzySvmError(Exception):
    """Base class for all errors raised by fuzzysvm."""


class IngestionError(FuzzySvmError):
    """A data file could not be parsed."""

    def __init__(self, message, row=None):
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)
        self.row = row


class TrainingError(FuzzySvmError):
    pass


class StatsError(FuzzySvmError):
    """Class statistics requested for a class with no members."""

    def __init__(self, label):
        super().__init__(f"no samples of class {label:+d} available for statistics")
        self.label = label


class NormalizationError(FuzzySvmError):
    pass


class ProbabilityError(FuzzySvmError):
    pass


class ModelFormatError(FuzzySvmError):
    pass
