"""Exception hierarchy shared by all modules."""


class PhaseSpaceError(Exception):
    """Base class for all errors raised by abphase."""


class GridTooSmall(PhaseSpaceError):
    pass


class NotPeriodic(PhaseSpaceError):
    pass


class GridMismatch(PhaseSpaceError):
    pass


class AliasingDetected(PhaseSpaceError):
    pass


class TruncationTooSevere(PhaseSpaceError):
    pass


class DegreeOverflow(PhaseSpaceError):
    pass


class BandwidthExceeded(PhaseSpaceError):
    pass


class StabilityViolation(PhaseSpaceError):
    pass


class TruncationOverflow(PhaseSpaceError):
    pass


class QuadratureDivergence(PhaseSpaceError):
    pass


class NonHermitian(PhaseSpaceError):
    pass


class FormalismMismatch(PhaseSpaceError):
    pass


class IncommensurateMomentum(PhaseSpaceError):
    pass


class UnsupportedState(PhaseSpaceError):
    pass


class ConfigError(Exception):
    """Base class for problems with a run configuration."""


class ParseError(ConfigError):
    def __init__(self, message, line=None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


class ValidationError(ConfigError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
