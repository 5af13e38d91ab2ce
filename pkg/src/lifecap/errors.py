"""Exception hierarchy shared by every stage."""


class LifecapError(Exception):
    """Base class for all errors raised by this package."""


class InvalidConfigError(LifecapError, ValueError):
    pass


class InvalidInputError(LifecapError, ValueError):
    pass


class UndefinedScoreError(LifecapError, ValueError):
    """A metric was requested on input for which it is not defined."""


class ManifestError(LifecapError):
    """The stream manifest could not be parsed or failed validation."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
