"""Exception hierarchy.

``NumericalFailure`` subclasses map to CLI exit code 2; ``PotentialParseError``
is a usage-level error (exit code 1).
"""


class PotentialParseError(ValueError):
    """Malformed potential specification (odd index, bad line, unknown preset)."""


class NumericalFailure(RuntimeError):
    """Base class for localization / convergence failures."""


class LocalizationError(NumericalFailure):
    def __init__(self, n, message):
        self.n = n
        super().__init__(f"n={n}: {message}")


class EigenSolverError(NumericalFailure):
    def __init__(self, index, message="QR iteration did not converge"):
        self.index = index
        super().__init__(f"{message} (eigenvalue index {index})")


class IntegrationError(NumericalFailure):
    pass


class BranchTrackingError(NumericalFailure):
    pass


class SolverError(NumericalFailure):
    pass


class MissingSpectralData(NumericalFailure):
    def __init__(self, missing):
        self.missing = sorted(missing)
        super().__init__(f"no spectral data for n in {self.missing}")


class CrossCheckFailure(NumericalFailure):
    pass
