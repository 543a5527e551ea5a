"""Exception types shared across the library."""


class PadicError(Exception):
    """Base class for domain errors raised by this library."""


class DivisionByIndistinguishableZero(PadicError):
    """Inversion of a value with no known digits (exact zero or a bare ball)."""


class NegativeValuation(PadicError):
    """Residue-field reduction of a value that is not integral."""


class InsufficientPrecision(PadicError):
    """An operation needs more known digits than the input carries."""


class NonMonicModulus(PadicError):
    """Polynomial reduction modulo a non-monic polynomial."""


class DegreeExceedsBound(PadicError):
    """Reciprocal of a polynomial whose degree exceeds the requested bound."""


class NonUnitConstantTerm(PadicError):
    """Series inversion with a constant term that is not an invertible integer."""


class PrecisionLossInGcd(PadicError):
    """A leading coefficient became indistinguishable from zero during xgcd."""


class SingularToPrecision(PadicError):
    """No usable pivot remains: the matrix is singular at working precision."""


class DiscriminantZero(PadicError):
    """The characteristic polynomial has a repeated root at working precision."""


class RandomizationExhausted(PadicError):
    """All randomized mixing attempts failed the invertibility test."""


class NotCyclic(PadicError):
    """No cyclic vector was found at working precision."""


class NotSimpleRoot(PadicError):
    """Root lifting requires a simple residue root."""


class NotSimpleEigenvalue(PadicError):
    """Eigenvalue precision requires a simple eigenvalue."""
