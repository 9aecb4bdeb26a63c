"""Exception classes shared across the package.

The CLI maps these onto exit codes, so error *class* matters, not just the
message: ConfigError -> 2, TraceParseError -> 3, CapacityError / ForecastError -> 4.
"""


class ConfigError(ValueError):
    """Invalid experiment configuration (unknown policy, bad weights, ...)."""


class TraceParseError(ValueError):
    """Malformed trace or raw-log input; carries a 1-based line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class CapacityError(RuntimeError):
    """Problem too large for an exhaustive method's stated bounds."""


class ForecastError(ValueError):
    """Buffer forecasting failed (non-positive predicted bandwidth)."""


class PredictionError(ValueError):
    """Throughput prediction failed (empty or invalid history)."""
