"""Exception types shared across the package."""


class SparseCvError(Exception):
    """Base class for all package-specific errors."""


class InvalidLabelError(SparseCvError):
    """Logistic responses must lie in {-1, +1}."""


class NonDifferentiableRegularizerError(SparseCvError):
    """Raised when a gradient/Hessian is requested for the l1 penalty."""


class SingularHessianError(SparseCvError):
    """Hessian factorization failed; carries the smallest observed pivot."""

    def __init__(self, message, smallest_pivot=None):
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class SingularDowndateError(SparseCvError):
    """Sherman-Morrison denominator fell below the leverage guard."""

    def __init__(self, message, index=None, denominator=None):
        super().__init__(message)
        self.index = index
        self.denominator = denominator


class SupportTooLargeError(SparseCvError):
    """Per-point downdates of the restricted Hessian cannot be inverted
    once the support size reaches N."""


class IncompleteLooSetError(SparseCvError):
    """A leave-one-out parameter set is missing entries."""


class DivergenceDetectedError(SparseCvError):
    """Stochastic inverse-Hessian iterates blew up (bad spectral scale)."""


class AlphaExceededError(SparseCvError):
    """The M_J slack consumed the whole incoherence margin alpha; the
    regularization threshold is undefined."""

    def __init__(self, message, mj=None):
        super().__init__(message)
        self.mj = mj


class DatasetParseError(SparseCvError):
    """Malformed dataset file; carries the 1-based offending line."""

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line
