"""Exception and warning classes shared across the package."""


class FracSheetError(Exception):
    """Base class for all package errors."""


class DomainError(FracSheetError, ValueError):
    """An argument lies outside the domain of the operation."""


class NonConvergenceError(FracSheetError, ArithmeticError):
    """An iterative or quadrature procedure missed its residual target."""


class GridError(FracSheetError, ValueError):
    """Grid too small or fields living on incompatible grids."""


class OrderingError(FracSheetError, ValueError):
    """Hurst pairs violate the strict componentwise ordering lo < hi."""


class DegenerateOrderingError(OrderingError):
    """Two Hurst pairs share a component, which the drift constructions exclude."""


class TruncationError(FracSheetError, ArithmeticError):
    """A truncated Neumann series exceeds its tail tolerance."""

    def __init__(self, message: str, bound: float):
        super().__init__(message)
        self.bound = bound


class RoughnessWarning(UserWarning):
    """Marchaud quadrature failed its Cauchy-residual check (input too rough)."""
