"""Exception hierarchy shared across the solver."""


class QubitMDError(Exception):
    """Base class for all errors raised by this package."""


class NonHermitianError(QubitMDError):
    """Input matrix is not Hermitian within tolerance."""


class NonPositiveTraceError(QubitMDError):
    """Input operator has non-positive trace and cannot be normalized."""


class LengthMismatchError(QubitMDError):
    """POVM length does not match the ensemble size."""


class InvalidEnsembleError(QubitMDError):
    """Ensemble violates the 1 <= N <= 4, weight >= 0 contract."""


class DegenerateSimplexError(QubitMDError):
    """Angles or barycentric coordinates requested for a degenerate simplex."""


class ConditionPrerequisiteError(QubitMDError):
    """Hyperbola coefficients requested where some l_i <= e_i."""


class DegenerateAngleError(QubitMDError):
    """An angle needed by the analytic condition is numerically indeterminate."""


class NegativeDiscriminantError(QubitMDError):
    """The root argument of the cone-angle formula is negative beyond tolerance."""


class DegenerateBetaError(QubitMDError):
    """sin(beta) vanished while computing a dihedral-frame angle."""


class DivisionNearZeroError(QubitMDError):
    """Candidate-radius denominator vanished."""


class DegenerateDenominatorError(QubitMDError):
    """Gauge-point denominator vanished."""


class NumericalInconsistencyError(QubitMDError):
    """An arccos argument left [-1, 1] by more than rounding allows."""


class WrongDimensionError(QubitMDError):
    """Condition check called with affine dimension != N - 1."""


class CertificateFailureError(QubitMDError):
    """KKT residuals of a constructed interior solution exceeded tolerance."""


class WrongNError(QubitMDError):
    """Operation defined only for a specific ensemble size."""
