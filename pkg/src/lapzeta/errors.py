"""Exception hierarchy shared by every lapzeta module."""


class LapzetaError(Exception):
    """Base class for all errors raised by lapzeta."""


class ZeroEigenvalue(LapzetaError, ValueError):
    """A zero mode is present and the caller did not ask to exclude it."""


class EmptySpectrum(LapzetaError, ValueError):
    """Nothing is left to sum."""


class NonPositiveT(LapzetaError, ValueError):
    pass


class MassNotSupported(LapzetaError, ValueError):
    pass


class ZeroMass(LapzetaError, ValueError):
    pass


class OrderTooHigh(LapzetaError, ValueError):
    pass


class TooLarge(LapzetaError, ValueError):
    pass


class InsufficientSamples(LapzetaError, ValueError):
    pass


class NumericalFailure(LapzetaError, ArithmeticError):
    """Base class for failures of a numerical procedure to reach its target."""


class QuadratureFailure(NumericalFailure):
    """Adaptive quadrature ran out of subdivisions before meeting tolerance."""


class IllConditioned(NumericalFailure):
    pass
