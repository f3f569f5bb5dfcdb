"""Exception hierarchy shared by every module."""


class CdmError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(CdmError, ValueError):
    """A data file could not be parsed."""

    def __init__(self, message, path=None, row=None, column=None):
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.path = path
        self.row = row
        self.column = column


class EmptyFileError(DataFormatError):
    pass


class UnknownColumnError(DataFormatError):
    pass


class NonNumericCellError(DataFormatError):
    pass


class SparseIndexError(DataFormatError):
    """Out-of-range, malformed or non-increasing sparse feature index."""


class DimensionMismatchError(CdmError, ValueError):
    pass


class ClassMismatchError(CdmError, ValueError):
    pass


class InsufficientDataError(CdmError, ValueError):
    pass


class SingularMatrixError(CdmError, ValueError):
    pass


class DegenerateScatterError(CdmError, ValueError):
    pass


class ConvergenceError(CdmError, RuntimeError):
    def __init__(self, message, gap=None):
        super().__init__(message if gap is None else f"{message} (final gap {gap:.3e})")
        self.gap = gap


class ModelFormatError(CdmError, ValueError):
    pass


class ConfigError(CdmError, ValueError):
    pass


class StageError(CdmError):
    """A pipeline sub-fit failed; ``stage`` names the step."""

    def __init__(self, stage, cause):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


class ZeroVarianceError(CdmError, ValueError):
    pass
