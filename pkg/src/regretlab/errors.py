"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the interval or range it must belong to."""


class CapabilityError(NotImplementedError):
    """The requested (model, operation) combination is not supported."""


class ResourceGuardError(RuntimeError):
    """An exact search would exceed the configured enumeration budget."""

    def __init__(self, message: str, size_estimate: float | None = None):
        if size_estimate is not None:
            message = f"{message} (estimated search size {size_estimate:g})"
        super().__init__(message)
        self.size_estimate = size_estimate


class ShapeError(ValueError):
    """Tree depths or array dimensions do not line up."""


class ProtocolError(RuntimeError):
    """An interaction prefix is inconsistent with the game being replayed."""


class ConfigError(ValueError):
    """An experiment or model configuration is invalid or incomplete."""
