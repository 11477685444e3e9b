"""Two-parameter fractional calculus, fractional Brownian sheet simulation,
Girsanov drift constructions and a Picard solver for SDEs in the plane driven
by two correlated fractional Brownian sheets."""

from fracsheet._core import BACKEND

__version__ = "0.1.0"
__all__ = ["BACKEND", "__version__"]
