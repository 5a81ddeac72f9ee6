"""Exception taxonomy.

Two families matter to callers: ValidationError covers bad inputs
(CLI exit code 2) and NumericalError covers failures of the numerical
routines on well-formed inputs (CLI exit code 3).
"""


class FactorCountError(Exception):
    """Base class for all package errors."""


class ValidationError(FactorCountError):
    """Invalid input data, options, or distribution parameters."""


class NumericalError(FactorCountError):
    """A numerical routine failed to produce a trustworthy result."""


class ParseError(ValidationError):
    def __init__(self, row, col, detail=""):
        self.row = row
        self.col = col
        msg = f"cannot parse cell at row {row}, column {col}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class RaggedRows(ValidationError):
    def __init__(self, row, expected, got):
        self.row = row
        super().__init__(
            f"row {row} has {got} fields, expected {expected}"
        )


class ZeroVarianceColumn(ValidationError):
    def __init__(self, col):
        self.col = col
        super().__init__(f"column {col} has zero sample variance, cannot scale")


class InvalidPercentile(ValidationError):
    def __init__(self, value):
        super().__init__(f"percentile must lie in (0, 100], got {value!r}")


class UnknownScenario(ValidationError):
    def __init__(self, name, known):
        super().__init__(
            f"unknown scenario {name!r}; known: {', '.join(sorted(known))}"
        )


class DimensionMismatch(ValidationError):
    pass


class AllZeroMatrix(ValidationError):
    def __init__(self):
        super().__init__("every column variance is zero")


class DomainError(ValidationError):
    pass


class InvalidDistribution(ValidationError):
    pass


class ConvergenceFailure(NumericalError):
    pass


class NoBracket(NumericalError):
    def __init__(self, detail=""):
        msg = "could not bracket the stationary point of the spectral map"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class MaxIterations(NumericalError):
    def __init__(self, n):
        super().__init__(f"root finder exceeded {n} iterations")


class DegenerateTopPair(NumericalError):
    def __init__(self, lam1, lam2):
        super().__init__(
            f"top eigenvalues too close to separate: {lam1!r} vs {lam2!r}"
        )


class ZeroD(NumericalError):
    def __init__(self):
        super().__init__("spike functional denominator vanished")
