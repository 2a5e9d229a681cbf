"""Exception hierarchy shared across the package."""


class SqannError(Exception):
    """Base class for all errors raised by this package."""


class DataError(SqannError):
    """Problems with input data (files, shapes, ill-defined samples)."""


class IllDefinedDatasetError(DataError):
    """Two samples share the same input but disagree on the output.

    ``pairs`` lists the offending (i, j) sample positions.
    """

    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__(f"dataset is ill-defined at sample pairs {self.pairs}")


class DuplicateInputError(DataError):
    """Strict ordering impossible: two samples share the same scalar input."""

    def __init__(self, pairs):
        self.pairs = list(pairs)
        super().__init__(f"duplicate scalar inputs at sample pairs {self.pairs}")


class DimensionMismatchError(DataError):
    pass


class CsvParseError(DataError):
    """CSV could not be parsed.  ``row`` and ``col`` are 0-based when known."""

    def __init__(self, message, row=None, col=None):
        self.row = row
        self.col = col
        where = "" if row is None else f" at row {row}" + ("" if col is None else f", column {col}")
        super().__init__(message + where)


class NonNumericCellError(CsvParseError):
    pass


class RaggedRowsError(CsvParseError):
    pass


class ConstructionError(SqannError):
    """Model construction could not complete."""


class DegenerateGapError(ConstructionError):
    """A non-positive gap between ordered inputs (or a non-positive dummy gap)."""


class InvalidToleranceError(ConstructionError):
    """Requested error tolerance is unachievable for the given dataset bounds."""


class UnresolvableCollisionError(ConstructionError):
    """A sample lands exactly on an existing node that stores a different output."""

    def __init__(self, sample_index, layer, node_index):
        self.sample_index = sample_index
        self.layer = layer
        self.node_index = node_index
        super().__init__(
            f"sample {sample_index} activates layer {layer} node {node_index} at exactly 1 "
            "with a different output value (ill-defined pair)"
        )


class BudgetExceededError(ConstructionError):
    """Construction did not settle within the allotted step budget.

    ``trace`` holds the construction events up to the point of failure so
    the cycling layer can be inspected.
    """

    def __init__(self, steps, layer, trace=None):
        self.steps = steps
        self.layer = layer
        self.trace = trace
        super().__init__(
            f"construction exceeded {steps} steps while working on layer {layer}; "
            "collision resolution appears to be cycling"
        )


class ContractViolationError(SqannError):
    """A documented precondition between models/datasets does not hold."""


class ModelFileError(SqannError):
    """Problems reading or writing model files."""


class VersionMismatchError(ModelFileError):
    def __init__(self, found, expected):
        self.found = found
        self.expected = expected
        super().__init__(f"model file format_version={found!r}, expected {expected}")


class SchemaError(ModelFileError):
    pass
