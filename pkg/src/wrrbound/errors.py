"""Exception hierarchy shared by every module of the package.

Every exception carries a stable ``code`` string so that command-line
reports and tests can match on it without parsing messages.
"""


class WrrError(Exception):
    code = "E_WRR"

    def __init__(self, message: str, code: str | None = None):
        super().__init__(message)
        if code is not None:
            self.code = code


class DomainError(WrrError, ValueError):
    """An argument lies outside the domain of the operation."""

    code = "E_DOMAIN"


class UnstableError(WrrError):
    """Long-term arrival rate is not below the service rate."""

    code = "E_UNSTABLE"


class SaturationError(WrrError):
    """Allocated service never catches up with the arrivals.

    ``hop`` names the output port when the error surfaces from a
    multi-hop analysis or a simulation.
    """

    code = "E_SATURATED"

    def __init__(self, message: str, hop: str | None = None, code: str | None = None):
        if hop is not None:
            message = f"{hop}: {message}"
        super().__init__(message, code)
        self.hop = hop


class MeanPhaseUndefined(WrrError):
    code = "E_MEAN_UNDEFINED"


class InfeasibleError(WrrError):
    code = "E_INFEASIBLE"


class NoSamplesError(WrrError):
    code = "E_NO_SAMPLES"


class UnknownFlowError(WrrError, KeyError):
    code = "E_UNKNOWN_FLOW"

    def __str__(self) -> str:
        return Exception.__str__(self)


class ConfigError(WrrError):
    """Syntax-level configuration error with a source position."""

    code = "E_CONFIG"

    def __init__(self, code: str, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        self.detail = message
        where = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{where}{message} [{code}]", code)
