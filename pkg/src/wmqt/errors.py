"""Exception types that map onto the CLI exit codes."""


class ConfigError(ValueError):
    """Bad or inconsistent experiment configuration (exit code 2)."""


class NumericalError(RuntimeError):
    """Numerical failure during propagation, e.g. blow-up (exit code 3)."""


class AnalysisError(RuntimeError):
    """Post-processing failure, e.g. no relaxation knee found (exit code 4)."""
