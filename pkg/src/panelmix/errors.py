"""Exception taxonomy shared by all panelmix modules."""


class PanelmixError(Exception):
    """Base class for all package-specific errors."""


class PeriodParseError(PanelmixError):
    """A period stamp could not be parsed; carries the offending row."""

    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class IntegrityError(PanelmixError):
    """Duplicate (entity, period) keys or inconsistent panel structure."""


class DegenerateInputError(PanelmixError):
    """Input carries no usable variation (constant series, all-masked column)."""


class InsufficientDataError(PanelmixError):
    """Too few observations for the requested operation."""


class RankDeficiencyError(PanelmixError):
    """Design matrix lacks full column rank; names an offending column."""

    def __init__(self, message: str, column: int | str | None = None):
        self.column = column
        super().__init__(message)


class ConvergenceError(PanelmixError):
    """Iterative solver exceeded its iteration cap or lost feasibility."""


class UnstableResamplingError(PanelmixError):
    """Bootstrap resampling produced too many rank-deficient designs."""


class ScalePositivityError(PanelmixError):
    """Fitted scale function is non-positive at some observations."""

    def __init__(self, message: str, violations: list | None = None):
        self.violations = violations or []
        super().__init__(message)


class TuningError(PanelmixError):
    """MCMC proposal tuning failed (degenerate acceptance rate)."""


class AlignmentError(PanelmixError):
    """Mixed-frequency timelines do not align period-for-period."""


class ConfigError(PanelmixError):
    """Invalid run configuration (CLI or programmatic)."""
