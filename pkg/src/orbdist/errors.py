"""Exception types raised by the solvers and utilities."""


class OrbDistError(Exception):
    """Base class for all package errors."""


class DomainError(OrbDistError, ValueError):
    """Orbital elements outside the supported (elliptic) domain."""


class ParseError(OrbDistError, ValueError):
    """Malformed catalog row."""

    def __init__(self, message, lineno=None):
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)
        self.lineno = lineno


class DegreeOverflow(OrbDistError, ArithmeticError):
    """Interpolated polynomial has nonzero coefficients above the declared degree."""


class NotDivisible(OrbDistError, ArithmeticError):
    """Polynomial is not divisible by (1 + t^2) within tolerance."""


class NoConvergence(OrbDistError, ArithmeticError):
    """Simultaneous root iteration did not converge."""


class EigenFailure(OrbDistError, ArithmeticError):
    """Colleague matrix eigenvalue computation failed."""


class DegenerateSystem(OrbDistError, ArithmeticError):
    """Polynomial system is degenerate (continuum of critical points or vanishing pivot)."""


class NoMinimum(OrbDistError):
    """No minimum point available (Weierstrass check failed)."""


class Coplanar(OrbDistError, ValueError):
    """Mutual nodal line undefined for coplanar orbits."""
