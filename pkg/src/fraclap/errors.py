"""Exception hierarchy.

Validation problems derive from :class:`ValidationError` (CLI exit code 2),
numerical breakdowns from :class:`NumericalError` (CLI exit code 3).
"""


class FraclapError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(FraclapError, ValueError):
    pass


class NumericalError(FraclapError, ArithmeticError):
    pass


class NotSymmetricCompatible(ValidationError):
    """``A B* != B A*`` for a boundary-condition pair."""


class RankDeficient(ValidationError):
    """The 2x4 block ``(A | B)`` does not have rank 2."""


class InvalidTheta(ValidationError):
    """A parameter matrix that should be Hermitian is not."""


class InvalidN(ValidationError):
    pass


class InvalidRange(ValidationError):
    pass


class OutOfDomain(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class PoleProximity(NumericalError):
    """Spectral parameter too close to a Dirichlet eigenvalue."""


class EigDecompFailed(NumericalError):
    pass


class IllConditionedMass(NumericalError):
    pass


class RootRefinementFailed(NumericalError):
    pass


class ModelTooCoarse(NumericalError):
    """Requested spectral window exceeds the resolved part of the discretization."""


class PencilSolverFailed(NumericalError):
    pass


class BCMatrixSingular(NumericalError):
    """``B - A M(lambda)`` is singular, so ``lambda`` is an eigenvalue."""


class NotAnEigenvalue(NumericalError):
    pass


class QuadratureNonConvergence(NumericalError):
    pass
