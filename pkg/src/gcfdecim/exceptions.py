"""Exception types raised by gcfdecim."""


class SpecError(ValueError):
    """A filter or cascade specification is malformed."""


class ImaginaryResidueError(ArithmeticError):
    """A response that must be real came out with a non-negligible imaginary part."""


class DivisionRemainderError(ArithmeticError):
    """Polynomial long division left a remainder that should have vanished."""


class DegenerateZeroError(ArithmeticError):
    """First-order zero displacement is undefined at a repeated zero."""

    def __init__(self, message, indices=()):
        super().__init__(message)
        self.indices = tuple(indices)


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before meeting its tolerance."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals
