"""Exception types shared across the package."""


class MqrError(Exception):
    """Base class for all package-specific errors."""


class ShapeError(MqrError, ValueError):
    """Operands have incompatible shapes; the message names both."""


class StateError(MqrError, RuntimeError):
    """An operation was called out of order (e.g. backward before forward)."""


class TrainingDivergenceError(MqrError, RuntimeError):
    """Training produced a non-finite loss or gradient."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class CsvFormatError(MqrError, ValueError):
    """A CSV cell or header failed to parse; carries row/column context."""

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        super().__init__(message)
        self.row = row
        self.column = column
