"""Exception hierarchy shared by every module."""


class FegkpError(Exception):
    """Base class for all package errors."""


class InputError(FegkpError, ValueError):
    """Malformed or out-of-range input (dimension mismatch, non-finite data...)."""


class TruncationError(FegkpError, ValueError):
    """The requested operation does not fit in the configured Fock cutoff."""

    def __init__(self, message, required_cutoff=None):
        super().__init__(message)
        self.required_cutoff = required_cutoff


class DimensionBudgetError(FegkpError, MemoryError):
    """A dense object would exceed the configured memory budget."""

    def __init__(self, message, required_bytes=None, budget_bytes=None):
        super().__init__(message)
        self.required_bytes = required_bytes
        self.budget_bytes = budget_bytes


class DegenerateBranchError(FegkpError, ArithmeticError):
    """A requested measurement branch has (numerically) zero probability."""


class ScheduleValidationError(FegkpError, ValueError):
    """A protocol schedule is malformed."""


class ConfigError(FegkpError, ValueError):
    """A run configuration failed strict validation."""

    def __init__(self, message, key=None, location=None):
        super().__init__(message)
        self.key = key
        self.location = location
