"""Exception types shared across the package."""


class SeriographError(Exception):
    """Base class for all package errors."""


class ValidationError(SeriographError, ValueError):
    """A parameter is outside its admissible range; the message names the field."""


class EmptyGraphError(SeriographError, ValueError):
    """An operation received a graph or vertex set with no usable vertices."""


class DegenerateSupportError(SeriographError, ValueError):
    """A kernel row is identically zero, so its support has no boundary."""


class DomainMismatchError(SeriographError, ValueError):
    """Two rankings (or a ranking and a vertex set) do not share the required domain."""


class ScheduleDegenerateError(SeriographError, ValueError):
    """An integer threshold of the refinement schedule computed to < 1.

    The message names the offending round.
    """


class ScheduleInfeasibleError(SeriographError, ValueError):
    """The requested accuracy needs more refinement rounds than are feasible."""


class SealedOracleError(SeriographError, RuntimeError):
    """Latent positions were requested from a graph that carries no oracle."""


class NoTriplesError(SeriographError, ValueError):
    """The interval-triple family is empty for the given size scale and stride."""


class ConfigError(SeriographError, ValueError):
    """An experiment configuration is invalid."""


class AllCellsFailedError(SeriographError, RuntimeError):
    """Every cell of an experiment grid failed."""
