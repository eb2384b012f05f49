"""Exception types shared across the package."""


class HeraldsimError(Exception):
    """Base class for all package-specific failures."""


class PhysicalityError(HeraldsimError):
    """A covariance matrix or state violates a physicality constraint."""


class HeraldingError(HeraldsimError):
    """Detector conditioning is impossible (zero-measure herald)."""


class ConvergenceError(HeraldsimError):
    """A numerical search did not converge to the requested tolerance."""
