"""Exception types raised by the solvers, the simulator and the CLI."""


class OptBankruptError(Exception):
    """Base class for every error raised by this package."""


class DomainError(OptBankruptError, ValueError):
    """A function was evaluated outside its domain (e.g. a non-positive dual value)."""


class InvalidParams(OptBankruptError, ValueError):
    """Parameters violate one or more standing assumptions of the model."""

    def __init__(self, violations):
        self.violations = tuple(violations)
        super().__init__("invalid parameters: " + ", ".join(self.violations))


class ConfigError(OptBankruptError, ValueError):
    """A configuration file, override or simulation setting is malformed."""


class NoCaseAdmissible(OptBankruptError, RuntimeError):
    """No candidate free-boundary system produced an ordering-consistent root."""


class BothCasesAdmissible(OptBankruptError, RuntimeError):
    """Both post-bankruptcy systems produced admissible roots."""


class MultipleCasesAdmissible(OptBankruptError, RuntimeError):
    """More than one primal free-boundary system produced an admissible root."""


class BracketingFailure(OptBankruptError, RuntimeError):
    """A scalar root could not be bracketed."""


class OutOfRange(OptBankruptError, ValueError):
    """Wealth below the liquidity floor F + eta."""
