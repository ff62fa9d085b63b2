"""Exception types raised across the package."""


class MommdError(Exception):
    """Base class for all package-specific errors."""


class HyperparameterError(MommdError, ValueError):
    """A kernel or algorithm hyperparameter is outside its valid range."""


class DomainMismatchError(MommdError, TypeError):
    """A point was fed to a kernel defined on a different domain."""


class ShapeError(MommdError, ValueError):
    """Vector/matrix dimensions do not line up."""


class PartitionError(MommdError, ValueError):
    """An index partition cannot be built (block count does not divide n)."""


class NotPositiveSemidefiniteError(MommdError, ValueError):
    """Cholesky factorisation failed even at the largest allowed jitter."""


class DataFormatError(MommdError, ValueError):
    """An input file does not match the expected on-disk format."""


class EstimationError(MommdError, RuntimeError):
    """An estimator could not produce a value (e.g. every grid point failed)."""
