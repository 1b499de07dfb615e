"""Exception hierarchy shared across the package.

The CLI maps these onto distinct exit codes, so library code should raise the
most specific class that applies.
"""


class GtPlateauError(Exception):
    """Base class for all package errors."""


class ConfigurationError(GtPlateauError, ValueError):
    """Invalid configuration: bad degrees, shapes, masks, option combinations."""


class DomainError(GtPlateauError, ValueError):
    """A numeric argument lies outside its mathematical domain."""


class SolverError(GtPlateauError, RuntimeError):
    """A linear solve failed (singular or numerically unusable system)."""


class ReconstructionError(GtPlateauError, RuntimeError):
    """A least-squares reconstruction is rank deficient for the given data."""


class NetFormatError(GtPlateauError, ValueError):
    """A control-net file could not be parsed or fails schema validation."""
