import config


class KitaevLabError(Exception):
    """Base class for every error raised by the library"""

    exit_code = config.EXIT_CODES["usage"]

    def __init__(self, key: str, *args, **details):
        message = config.ERROR_MESSAGES[key].format(*args)
        super().__init__(message)
        self.key = key
        self.details = details


class LatticeSizeError(KitaevLabError, ValueError):
    pass


class PlaquetteLookupError(KitaevLabError, LookupError):
    pass


class GeometryError(KitaevLabError, ValueError):
    pass


class RegisterError(KitaevLabError, ValueError):
    pass


class ProtocolError(KitaevLabError, RuntimeError):
    pass


class FluxConstraintError(KitaevLabError, ValueError):
    pass


class UnsupportedSectorError(KitaevLabError, ValueError):
    pass


class DomainError(KitaevLabError, ValueError):
    pass


class ConfigError(DomainError):
    """Bad run configuration, from flags or a config file"""


class ResourceLimitError(KitaevLabError, MemoryError):
    exit_code = config.EXIT_CODES["resource"]


class NumericError(KitaevLabError, ArithmeticError):
    exit_code = config.EXIT_CODES["numeric"]


class ConvergenceError(NumericError):
    """Lanczos gave up; `details["residuals"]` holds the last residual of every pair"""


class InconclusiveError(KitaevLabError, RuntimeError):
    exit_code = config.EXIT_CODES["numeric"]
