"""Exception types raised across the package."""


class AtomlocError(Exception):
    """Base class for all package errors."""


class InvalidParameters(AtomlocError, ValueError):
    pass


class DegenerateDenominator(AtomlocError, ArithmeticError):
    """The susceptibility denominator Z fell below the guard value."""


class InvalidReduction(AtomlocError, ValueError):
    pass


class InvalidScheme(AtomlocError, ValueError):
    pass


class ZeroDrive(AtomlocError, ValueError):
    pass


class ZeroDetuning(AtomlocError, ArithmeticError):
    pass


class ComplexBranch(AtomlocError, ArithmeticError):
    """The detuning cubic does not have three real roots."""


class SingularSystem(AtomlocError, ArithmeticError):
    pass


class NoConvergence(AtomlocError, RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InvalidConfig(AtomlocError, ValueError):
    pass


class DegenerateEigenvalueWarning(RuntimeWarning):
    """Two dressed-state energies coincide; eigenvectors were taken from an
    orthonormal basis of the degenerate subspace."""
