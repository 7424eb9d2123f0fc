"""Exception types shared across the package."""


class CapacityError(ValueError):
    """A size limit would be exceeded (qubit count, coalition count, ...)."""


class ShapeError(ValueError):
    """An array or vector has the wrong length/shape for the operation."""


class EncodingError(ValueError):
    """Amplitude data cannot be loaded into a quantum state."""


class DegenerateInputError(ValueError):
    """Input carries no usable signal (e.g. a zero feature vector)."""


class ParseError(ValueError):
    """A data file is malformed. Carries the offending line number."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CheckpointError(ValueError):
    """A checkpoint file is missing, corrupt, or from an unknown version."""
