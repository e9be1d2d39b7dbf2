"""Exception types raised by the library; the CLI maps them to exit codes."""


class DomainError(ValueError):
    """A parameter lies outside the hypotheses of the bound being evaluated."""


class ConfigError(ValueError):
    """Malformed command-line flags or configuration file."""


class ReportIntegrityError(ValueError):
    """A report file failed its checksum verification."""


class SolverError(ArithmeticError):
    """An iterative solver stopped without meeting its convergence contract."""
