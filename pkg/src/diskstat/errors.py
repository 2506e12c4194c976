"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the function."""


class NumericalError(ArithmeticError):
    """An iteration, quadrature or consistency check failed numerically."""
