"""Exception hierarchy.  CLI exit codes are keyed off these classes."""


class QSARError(Exception):
    """Base class for every error raised by this package."""


class SmilesError(QSARError, ValueError):
    def __init__(self, message, smiles="", position=None):
        self.smiles = smiles
        self.position = position
        if position is not None:
            message = f"{message} at position {position} in {smiles!r}"
        elif smiles:
            message = f"{message} in {smiles!r}"
        super().__init__(message)


class SmilesSyntaxError(SmilesError):
    pass


class UnsupportedElementError(SmilesError):
    pass


class ValenceError(SmilesError):
    pass


class UnclosedRingError(SmilesError):
    pass


class DataError(QSARError, ValueError):
    """Problem with input data: missing columns, bad rows, conflicts."""


class DuplicateConflictError(DataError):
    def __init__(self, message, rows):
        self.rows = tuple(rows)
        super().__init__(message)


class ConfigError(QSARError, ValueError):
    """Invalid pipeline or model configuration."""


class FitError(QSARError, RuntimeError):
    """A model could not be fitted on the supplied data."""


class UndefinedMetricError(FitError):
    """r2/q2 requested for constant targets."""


class FeatureMismatchError(QSARError, ValueError):
    pass


class ArchiveError(QSARError):
    pass


class SchemaVersionError(ArchiveError):
    pass


class CorruptArchiveError(ArchiveError):
    pass


class NoSuccessfulModelsError(QSARError):
    pass
