"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition or invariant."""


class ConfigError(ValidationError):
    """Raised for malformed configuration: unknown keys, bad kinds, missing callbacks."""


class BudgetError(RuntimeError):
    """Raised when a solver or enumeration exceeds its resource budget."""
