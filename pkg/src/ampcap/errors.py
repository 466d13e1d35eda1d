"""Exception types raised across the package."""


class DomainError(ValueError):
    """Argument outside the domain of a function."""


class ThresholdError(ValueError):
    """Parameters at or beyond the laser threshold L/l_a = pi."""


class DegenerateError(ValueError):
    """Unphysical scattering matrix (for example a zero output row)."""


class QuadratureError(RuntimeError):
    """Quadrature could not meet its error bound within the iteration budget."""


class NoSignChangeError(ValueError):
    """Root bracket does not contain a sign change."""

    def __init__(self, message, low=None, high=None):
        super().__init__(message)
        self.low = low
        self.high = high


class FitQualityError(RuntimeError):
    """Mean-free-path fit residual exceeds the accepted bound."""


class LasingInstabilityError(RuntimeError):
    """Scattering problem is singular: a pole of S sits on or above the real axis."""

    def __init__(self, message, sample_index=None):
        super().__init__(message)
        self.sample_index = sample_index
