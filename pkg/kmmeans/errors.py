"""
Error Types for kmmeans

Every failure the library raises derives from KmMeansError. Input faults are also
ValueErrors so callers that only know the standard hierarchy still catch them.
The CLI maps DataError to exit code 3 and ConfigurationError to exit code 2.
"""

from typing import Optional


class KmMeansError(Exception):
    """Root of the kmmeans error hierarchy"""


class DataError(KmMeansError, ValueError):
    """Input data cannot be clustered as given"""


class ConfigurationError(KmMeansError, ValueError):
    """A parameter combination is invalid"""


class EmptyInput(DataError):
    def __init__(self, what: str = "dataset"):
        self.what = what
        super().__init__(f"Empty input: {what} has no rows")


class EmptyFile(DataError):
    def __init__(self, path: str):
        self.path = path
        super().__init__(f"Empty file: {path}")


class RowAllMissing(DataError):
    """A row has no observed feature"""

    def __init__(self, row: int):
        self.row = row
        super().__init__(f"Row {row} has all features missing")


class RaggedRows(DataError):
    def __init__(self, row: int, expected: int, found: int):
        self.row = row
        self.expected = expected
        self.found = found
        super().__init__(f"Row {row} has {found} fields, expected {expected}")


class ParseError(DataError):
    """A cell is neither numeric, empty, nor the missing token"""

    def __init__(self, row: int, col: int, token: Optional[str] = None):
        self.row = row
        self.col = col
        self.token = token
        super().__init__(f"Cannot parse value {token!r} at row {row}, column {col}")


class NonPositiveForLog(DataError):
    def __init__(self, col: str):
        self.col = col
        super().__init__(f"Column {col} has non-positive observed values; log10 undefined")


class ZeroVariance(DataError):
    def __init__(self, col: str):
        self.col = col
        super().__init__(f"Column {col} has zero variance over its observed cells; cannot scale")


class LengthMismatch(DataError):
    def __init__(self, left: int, right: int):
        self.left = left
        self.right = right
        super().__init__(f"Label vectors differ in length: {left} vs {right}")


class InsufficientCompleteRows(DataError):
    def __init__(self, k: int, complete: int):
        self.k = k
        self.complete = complete
        super().__init__(f"Need at least {k} fully observed rows, found {complete}")


class KGreaterThanN(ConfigurationError):
    def __init__(self, k: int, n: int):
        self.k = k
        self.n = n
        super().__init__(f"Number of clusters K={k} exceeds number of rows n={n}")


class LastMember(KmMeansError):
    """Removing the row would empty its cluster"""

    def __init__(self, cluster: int):
        self.cluster = cluster
        super().__init__(f"Cluster {cluster} has a single member; removal forbidden")


class ZeroDistortion(KmMeansError):
    def __init__(self, k: int):
        self.k = k
        super().__init__(f"Distortion is zero at K={k}; perfect fit")


class NonConvergence(KmMeansError):
    def __init__(self, passes: int):
        self.passes = passes
        super().__init__(f"No convergence after {passes} optimal-transfer passes")


class InfeasibleSeparation(ConfigurationError):
    def __init__(self, separation: float, attempts: int):
        self.separation = separation
        self.attempts = attempts
        super().__init__(
            f"Could not place centers {separation} sigma apart after {attempts} attempts"
        )


class InfeasibleRate(ConfigurationError):
    def __init__(self, rate: float, detail: str = ""):
        self.rate = rate
        suffix = f" ({detail})" if detail else ""
        super().__init__(f"Censoring rate {rate:.4f} must be below 1{suffix}")


class DegenerateDenominator(KmMeansError):
    def __init__(self):
        super().__init__("Adjusted Rand index undefined: both partitions trivial and different")
