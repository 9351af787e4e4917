"""Exception types shared across the package.

Every failure mode has its own class so callers (and the CLI) can report a
stable error code; the class name is the code. File-format errors carry
row/column context where it exists.
"""


class L1ScutError(Exception):
    """Base class for all package errors."""

    @property
    def code(self) -> str:
        return type(self).__name__


class DataFormatError(L1ScutError):
    """A dataset file violates its format contract."""

    def __init__(self, message: str, *, row: int | None = None, col: int | None = None):
        self.row = row
        self.col = col
        ctx = ""
        if row is not None:
            ctx += f" (row {row}"
            ctx += f", col {col})" if col is not None else ")"
        super().__init__(message + ctx)


class MalformedHeader(DataFormatError):
    pass


class MalformedValue(DataFormatError):
    pass


class NonFiniteValue(DataFormatError):
    pass


class MissingLabelColumn(DataFormatError):
    pass


class TruncatedPayload(DataFormatError):
    pass


class EmptyClass(L1ScutError):
    """A class in {1..C} has no samples."""

    def __init__(self, label: int):
        self.label = label
        super().__init__(f"class {label} has no samples")


class InvalidClassCount(L1ScutError):
    pass


class InsufficientClassSize(L1ScutError):
    """A stratified split would leave some class without a test sample."""

    def __init__(self, label: int, size: int, requested: int):
        self.label = label
        super().__init__(
            f"class {label} has {size} samples; cannot take {requested} "
            f"for training and still leave a test sample"
        )


class NonPSDCovariance(L1ScutError):
    pass


class SingularDenominator(L1ScutError):
    """Determinant-ratio denominator is singular for the given projection."""


class ZeroTrace(L1ScutError):
    """Trace-ratio denominator is zero for the given projection."""


class ZeroWithinDispersion(L1ScutError):
    """Every within-class pair is identical under the current direction."""


class ZeroDenominator(L1ScutError):
    """A ratio denominator in the ascent direction hit zero; the caller
    should perturb the iterate and continue."""


class DimensionExhausted(L1ScutError):
    """Deflation ran out of usable directions before reaching the target."""

    def __init__(self, reached: int, requested: int):
        self.reached = reached
        super().__init__(
            f"data became degenerate after {reached} of {requested} directions"
        )


class DimensionMismatch(L1ScutError):
    pass


class NotPositiveDefinite(L1ScutError):
    """Pencil denominator matrix is not positive definite even after
    regularization."""
