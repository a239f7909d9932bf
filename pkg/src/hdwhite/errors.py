"""Exception hierarchy shared by the library and the command line."""


class WhiteNoiseError(Exception):
    """Base class for all errors raised by hdwhite."""


class PanelParseError(WhiteNoiseError, ValueError):
    """A data file could not be turned into a panel."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateComponentError(WhiteNoiseError, ValueError):
    """A component series has zero sample variance."""

    def __init__(self, component):
        self.component = component
        super().__init__(f"component {component} has zero sample variance")


class InfeasibleMethodError(WhiteNoiseError):
    """A test cannot be computed for the given dimensions (e.g. LM with pK >= n - K)."""


class SamplerError(WhiteNoiseError):
    """The multiplier covariance could not be factorized."""


class ConfigError(WhiteNoiseError, ValueError):
    """Malformed simulation config."""

    def __init__(self, message, key=None):
        self.key = key
        super().__init__(message)
