"""Exception types raised across the package."""


class FFAmpError(Exception):
    """Base class for all package errors."""


class InvalidParameter(FFAmpError, ValueError):
    """A numeric parameter is outside its allowed range."""


class InvalidState(FFAmpError, ValueError):
    """Mean/covariance arrays are ill-shaped or not symmetric."""


class UnphysicalState(FFAmpError, ValueError):
    """A state or correction violates the uncertainty principle."""
