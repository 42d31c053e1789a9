"""Exception hierarchy shared across the package."""


class MosaicError(Exception):
    """Base class for all package errors."""


class DomainError(MosaicError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class NumericalError(MosaicError, RuntimeError):
    """A numerical procedure failed to converge or produced non-finite values."""


class IllConditionedError(NumericalError):
    """The pole/residue decomposition is (near-)defective.

    Callers are expected to fall back to direct time integration.
    """


class ConfigError(MosaicError, ValueError):
    """Invalid or unknown run-configuration entry."""
