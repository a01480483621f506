"""Exception types raised by oto_clock.

Everything derives from ValueError so callers that only care about
"bad input" can catch that.
"""


class OtoClockError(ValueError):
    pass


class SpaceMismatchError(OtoClockError):
    pass


class SiteKindError(OtoClockError):
    pass


class HermiticityError(OtoClockError):
    pass


class DimensionCapError(OtoClockError):
    pass


class SingularDetuningError(OtoClockError):
    pass


class NoRealSolutionError(OtoClockError):
    pass


class NormalizationError(OtoClockError):
    pass


class ClockStructureError(OtoClockError):
    """Operator is not block-diagonal in the clock photon number."""


class ConfigError(OtoClockError):
    """Invalid experiment configuration, optionally anchored to a file position."""

    def __init__(self, message, path=None, line=None, column=None, key=None):
        self.message = message
        self.path = path
        self.line = line
        self.column = column
        self.key = key
        super().__init__(self.located())

    def located(self):
        if self.path is None:
            return self.message
        if self.line is None:
            return f"{self.path}: {self.message}"
        if self.column is None:
            return f"{self.path}:{self.line}: {self.message}"
        return f"{self.path}:{self.line}:{self.column}: {self.message}"
