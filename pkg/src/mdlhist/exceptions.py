"""Exception hierarchy shared by every module of the package."""


class HistogramError(ValueError):
    """Base class for all input and contract errors raised by mdlhist."""


class EmptyInputError(HistogramError):
    pass


class NonFiniteValueError(HistogramError):
    def __init__(self, index, value):
        super().__init__(f"non-finite value {value!r} at index {index}")
        self.index = index
        self.value = value


class ParseError(HistogramError):
    def __init__(self, line_number, line, reason):
        super().__init__(f"line {line_number}: {reason}: {line!r}")
        self.line_number = line_number


class EmptyRangeError(HistogramError):
    pass


class NonPositiveIntegerError(HistogramError):
    pass


class InvalidArgumentsError(HistogramError):
    pass


class InconsistentCountsError(HistogramError):
    pass


class InconsistentWidthsError(HistogramError):
    pass


class IndexOutOfRangeError(HistogramError, IndexError):
    pass


class NonPositiveNullCostError(HistogramError):
    pass


class DegenerateDomainError(HistogramError):
    pass


class InvalidRangeError(HistogramError):
    pass


class NonFiniteInputError(HistogramError):
    pass


class OutOfDomainError(HistogramError):
    pass


class NotPichError(HistogramError):
    pass


class UnsplittableDegenerateError(HistogramError):
    pass


class InvalidSpecError(HistogramError):
    pass


class InvalidNError(HistogramError):
    pass


class BuildError(HistogramError):
    """A sub-build of the two-level procedure failed."""


class InvariantViolationError(RuntimeError):
    """An internal consistency check failed; indicates a bug, not bad input."""
