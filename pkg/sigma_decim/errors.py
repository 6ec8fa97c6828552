"""Exception hierarchy shared by the simulation services and the CLI."""

from __future__ import annotations


class DecimError(Exception):
    """Base class for every error raised by sigma_decim."""


class ContractViolationError(DecimError, ValueError):
    """A caller broke an operation's precondition (widths, rates, lengths)."""


class ConfigurationError(DecimError, ValueError):
    """A filter, schedule or chain description is not realisable."""


class InputDomainError(DecimError, ValueError):
    """An input sample lies outside the representable input range."""

    def __init__(self, message: str, index: int) -> None:
        super().__init__(f"{message} (sample index {index})")
        self.index = index


class DesignError(DecimError):
    """A filter specification cannot be met."""

    def __init__(self, message: str, achieved: float | None = None) -> None:
        super().__init__(message)
        self.achieved = achieved


class InstabilityError(DecimError, RuntimeError):
    """The sigma-delta loop diverged."""

    def __init__(self, message: str, index: int) -> None:
        super().__init__(f"{message} (sample index {index})")
        self.index = index


class VerificationError(DecimError):
    """One or more equivalence checks failed."""


class StreamFormatError(DecimError, ValueError):
    """A stream or coefficient file is malformed."""
